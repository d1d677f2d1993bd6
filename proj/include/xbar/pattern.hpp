#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace xbar {

/// Stored bit of a cell. LRS encodes logical 1.
enum class Bit : std::uint8_t { Hrs = 0, Lrs = 1 };

constexpr int to_int(Bit b) noexcept { return b == Bit::Lrs ? 1 : 0; }
constexpr Bit from_int(int v) noexcept { return v != 0 ? Bit::Lrs : Bit::Hrs; }

/// Row-major M x N matrix of stored bits.
class DataPattern {
public:
    DataPattern() = default;
    DataPattern(std::size_t rows, std::size_t cols, Bit fill = Bit::Hrs);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    Bit operator()(std::size_t i, std::size_t j) const { return bits_[i * cols_ + j]; }
    Bit& operator()(std::size_t i, std::size_t j) { return bits_[i * cols_ + j]; }

    const std::vector<Bit>& bits() const noexcept { return bits_; }
    std::size_t count(Bit b) const noexcept;

    /// i.i.d. Bernoulli pattern, P(LRS) = p_lrs.
    static DataPattern random(std::size_t rows, std::size_t cols, double p_lrs, std::mt19937_64& rng);

    friend bool operator==(const DataPattern&, const DataPattern&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Bit> bits_;
};

// Packed binary layout: "XBPT" magic, u32 rows, u32 cols (little endian), then
// ceil(rows*cols/8) bytes of row-major bits, LSB first within each byte.
void write_pattern_binary(std::ostream& os, const DataPattern& p);
DataPattern read_pattern_binary(std::istream& is);

// ASCII layout: one line per row, characters '0'/'1'. Blank lines and lines
// starting with '#' are ignored.
void write_pattern_ascii(std::ostream& os, const DataPattern& p);
DataPattern read_pattern_ascii(std::istream& is);

DataPattern load_pattern(const std::string& path);  // picks format from the magic bytes
void save_pattern(const std::string& path, const DataPattern& p, bool binary);

}  // namespace xbar
