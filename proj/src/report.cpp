#include "xbar/report.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#ifndef XBAR_VERSION
#define XBAR_VERSION "0.1.0"
#endif

namespace xbar {

void CsvTable::add_row(std::vector<std::string> row) {
    if (row.size() != header.size()) throw std::invalid_argument("CsvTable: row width does not match header");
    rows.push_back(std::move(row));
}

std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_csv(std::ostream& os, const CsvTable& table) {
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) os << ',';
            os << csv_escape(cells[k]);
        }
        os << "\r\n";
    };
    line(table.header);
    for (const auto& r : table.rows) line(r);
}

CsvTable read_csv(std::istream& is) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> rec;
    std::string field;
    bool quoted = false, any = false;
    char c;
    auto end_field = [&] {
        rec.push_back(std::move(field));
        field.clear();
    };
    while (is.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (is.peek() == '"') {
                    is.get(c);
                    field += '"';
                } else
                    quoted = false;
            } else
                field += c;
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && is.peek() == '\n') is.get(c);
            end_field();
            records.push_back(std::move(rec));
            rec.clear();
            any = false;
        } else
            field += c;
    }
    if (quoted) throw std::runtime_error("read_csv: unterminated quoted field");
    if (any) {
        end_field();
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw std::runtime_error("read_csv: missing header");
    CsvTable t;
    t.header = std::move(records.front());
    for (std::size_t k = 1; k < records.size(); ++k) t.add_row(std::move(records[k]));
    return t;
}

const char* version_string() noexcept { return XBAR_VERSION; }

EmittedFiles emit_results(const std::filesystem::path& dir, std::string_view name, std::uint64_t seed,
                          const CsvTable& table, nlohmann::ordered_json summary) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error(dir.string() + ": " + ec.message());
    const std::string stem = std::string(name) + "-" + std::to_string(seed);
    EmittedFiles f{dir / (stem + ".csv"), dir / (stem + ".json")};

    std::ofstream csv(f.csv, std::ios::binary);
    if (!csv) throw std::runtime_error(f.csv.string() + ": cannot open for writing");
    write_csv(csv, table);
    if (!csv) throw std::runtime_error(f.csv.string() + ": write failed");

    nlohmann::ordered_json doc;
    doc["version"] = version_string();
    doc["experiment"] = std::string(name);
    doc["seed"] = seed;
    for (auto& el : summary.items()) doc[el.key()] = el.value();
    std::ofstream js(f.json, std::ios::binary);
    if (!js) throw std::runtime_error(f.json.string() + ": cannot open for writing");
    js << doc.dump(2) << '\n';
    if (!js) throw std::runtime_error(f.json.string() + ": write failed");
    return f;
}

}  // namespace xbar
