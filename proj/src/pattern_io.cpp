#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "xbar/pattern.hpp"

namespace xbar {

namespace {

constexpr std::array<char, 4> kMagic{'X', 'B', 'P', 'T'};

void put_u32(std::ostream& os, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    os.write(b, 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("pattern: truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

DataPattern::DataPattern(std::size_t rows, std::size_t cols, Bit fill)
    : rows_(rows), cols_(cols), bits_(rows * cols, fill) {}

std::size_t DataPattern::count(Bit b) const noexcept {
    std::size_t n = 0;
    for (Bit x : bits_) n += (x == b);
    return n;
}

DataPattern DataPattern::random(std::size_t rows, std::size_t cols, double p_lrs, std::mt19937_64& rng) {
    if (!(p_lrs >= 0.0 && p_lrs <= 1.0)) throw std::invalid_argument("pattern: p_lrs must be in [0, 1]");
    DataPattern p(rows, cols);
    std::bernoulli_distribution coin(p_lrs);
    for (auto& b : p.bits_) b = coin(rng) ? Bit::Lrs : Bit::Hrs;
    return p;
}

void write_pattern_binary(std::ostream& os, const DataPattern& p) {
    os.write(kMagic.data(), kMagic.size());
    put_u32(os, static_cast<std::uint32_t>(p.rows()));
    put_u32(os, static_cast<std::uint32_t>(p.cols()));
    const auto& bits = p.bits();
    std::string packed((bits.size() + 7) / 8, '\0');
    for (std::size_t k = 0; k < bits.size(); ++k)
        if (bits[k] == Bit::Lrs) packed[k / 8] = static_cast<char>(packed[k / 8] | (1u << (k % 8)));
    os.write(packed.data(), static_cast<std::streamsize>(packed.size()));
}

DataPattern read_pattern_binary(std::istream& is) {
    std::array<char, 4> magic{};
    if (!is.read(magic.data(), 4) || magic != kMagic) throw std::runtime_error("pattern: bad magic");
    const std::uint32_t rows = get_u32(is);
    const std::uint32_t cols = get_u32(is);
    DataPattern p(rows, cols);
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    std::string packed((n + 7) / 8, '\0');
    if (!is.read(packed.data(), static_cast<std::streamsize>(packed.size())))
        throw std::runtime_error("pattern: truncated payload");
    for (std::size_t k = 0; k < n; ++k)
        if ((static_cast<unsigned char>(packed[k / 8]) >> (k % 8)) & 1u) p(k / cols, k % cols) = Bit::Lrs;
    return p;
}

void write_pattern_ascii(std::ostream& os, const DataPattern& p) {
    for (std::size_t i = 0; i < p.rows(); ++i) {
        for (std::size_t j = 0; j < p.cols(); ++j) os << (p(i, j) == Bit::Lrs ? '1' : '0');
        os << '\n';
    }
}

DataPattern read_pattern_ascii(std::istream& is) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(is, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!lines.empty() && line.size() != lines.front().size())
            throw std::runtime_error("pattern: ragged ASCII grid at row " + std::to_string(lines.size()));
        for (char c : line)
            if (c != '0' && c != '1') throw std::runtime_error("pattern: ASCII grid must contain only 0/1");
        lines.push_back(line);
    }
    if (lines.empty()) throw std::runtime_error("pattern: empty ASCII grid");
    DataPattern p(lines.size(), lines.front().size());
    for (std::size_t i = 0; i < lines.size(); ++i)
        for (std::size_t j = 0; j < lines[i].size(); ++j) p(i, j) = from_int(lines[i][j] - '0');
    return p;
}

DataPattern load_pattern(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("pattern: cannot open " + path);
    std::array<char, 4> head{};
    in.read(head.data(), 4);
    in.clear();
    in.seekg(0);
    if (head == kMagic) return read_pattern_binary(in);
    return read_pattern_ascii(in);
}

void save_pattern(const std::string& path, const DataPattern& p, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw std::runtime_error("pattern: cannot write " + path);
    if (binary)
        write_pattern_binary(out, p);
    else
        write_pattern_ascii(out, p);
    if (!out) throw std::runtime_error("pattern: write failed for " + path);
}

}  // namespace xbar
