#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace xbar {

/// Header plus string cells; numbers are formatted by the producer.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
};

/// Number with 12 significant digits (enough to keep nA-scale signals exact
/// to better than 1 ppb).
std::string csv_number(double v);

/// RFC 4180 quoting: fields containing comma, quote, CR or LF are quoted and
/// embedded quotes doubled.
std::string csv_escape(std::string_view field);

void write_csv(std::ostream& os, const CsvTable& table);

/// Strict CSV reader for tables written by write_csv.
CsvTable read_csv(std::istream& is);

const char* version_string() noexcept;

struct EmittedFiles {
    std::filesystem::path csv;
    std::filesystem::path json;
};

/// Writes `{name}-{seed}.csv` and `{name}-{seed}.json` into `dir` (created if
/// missing). The summary gains "version" and "experiment" keys. Throws
/// std::runtime_error naming the path on IO failure.
EmittedFiles emit_results(const std::filesystem::path& dir, std::string_view name, std::uint64_t seed,
                          const CsvTable& table, nlohmann::ordered_json summary);

}  // namespace xbar
