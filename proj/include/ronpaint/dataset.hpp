#pragma once

// Labeled fingerprint datasets and the CSV ingestion format
//
//   name,smiles,ron,label
//
// `ron` is an optional real, `label` an optional `high|low`; each row needs at
// least one of them. A measured RON at or above 94.4 is high. Rows that fail
// to parse are collected and reported together; nothing is skipped silently.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ronpaint/digest.hpp"
#include "ronpaint/error.hpp"
#include "ronpaint/molgraph.hpp"
#include "ronpaint/patterns.hpp"

namespace ronpaint {

enum class RonClass : std::uint8_t { low = 0, high = 1 };

inline constexpr double kRonThreshold = 94.4;

inline RonClass classify_ron(double ron) { return ron >= kRonThreshold ? RonClass::high : RonClass::low; }

inline std::string_view to_string(RonClass c) { return c == RonClass::high ? "high" : "low"; }

struct DatasetRow {
    std::string name;
    std::string smiles;
    std::optional<Molecule> molecule;  // absent only for synthetic fingerprint-only rows
    FingerprintVector fingerprint;
    std::optional<double> measured_ron;
    RonClass label = RonClass::low;
};

class Dataset {
public:
    Dataset() = default;

    void add(DatasetRow row) {
        if (rows_.empty()) {
            pattern_set_id_ = row.fingerprint.pattern_set_id;
            n_features_ = row.fingerprint.size();
        } else if (row.fingerprint.pattern_set_id != pattern_set_id_ || row.fingerprint.size() != n_features_) {
            throw InputError("row '" + row.name + "' was fingerprinted with a different pattern set");
        }
        if (row.measured_ron && classify_ron(*row.measured_ron) != row.label)
            throw InputError("row '" + row.name + "': label disagrees with measured RON");
        rows_.push_back(std::move(row));
    }

    /// Fingerprint-only dataset, for synthetic experiments.
    static Dataset from_bits(const std::vector<std::vector<std::uint8_t>>& bits, const std::vector<RonClass>& labels,
                             const std::string& pattern_set_id = "synthetic") {
        if (bits.size() != labels.size()) throw InputError("bits and labels differ in length");
        Dataset d;
        for (std::size_t i = 0; i < bits.size(); ++i) {
            DatasetRow row;
            row.name = "row" + std::to_string(i);
            row.fingerprint = FingerprintVector{bits[i], pattern_set_id};
            row.label = labels[i];
            d.add(std::move(row));
        }
        return d;
    }

    const std::vector<DatasetRow>& rows() const noexcept { return rows_; }
    const DatasetRow& row(std::size_t i) const { return rows_.at(i); }
    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }
    std::size_t n_features() const noexcept { return n_features_; }
    const std::string& pattern_set_id() const noexcept { return pattern_set_id_; }

    std::vector<std::uint8_t> labels() const {
        std::vector<std::uint8_t> out;
        out.reserve(rows_.size());
        for (const auto& r : rows_) out.push_back(static_cast<std::uint8_t>(r.label));
        return out;
    }

    std::size_t count(RonClass c) const {
        std::size_t n = 0;
        for (const auto& r : rows_) n += r.label == c;
        return n;
    }

    Dataset subset(const std::vector<std::size_t>& indices) const {
        Dataset d;
        d.pattern_set_id_ = pattern_set_id_;
        d.n_features_ = n_features_;
        for (auto i : indices) d.rows_.push_back(rows_.at(i));
        return d;
    }

private:
    std::vector<DatasetRow> rows_;
    std::string pattern_set_id_;
    std::size_t n_features_ = 0;
};

/// One data line of a dataset CSV, before SMILES parsing.
struct CsvRecord {
    std::size_t line = 0;
    std::string name;
    std::string smiles;
    std::optional<double> ron;
    std::optional<RonClass> label;
};

namespace detail {

// RFC 4180 field splitting: commas separate, double quotes protect commas and
// "" escapes a quote. Compound names such as "2,2,4-trimethylpentane" need it.
inline std::vector<std::string> split_csv_line(std::string_view line, std::size_t lineno) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    fields.back() += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    if (quoted) throw InputError("line " + std::to_string(lineno) + ": unterminated quoted field");
    return fields;
}

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Parses dataset CSV text. All malformed rows are reported in one error.
inline std::vector<CsvRecord> parse_dataset_csv(std::string_view content) {
    std::istringstream in{std::string(content)};
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    std::vector<CsvRecord> out;
    std::vector<std::string> problems;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        if (!header_seen) {
            auto header = detail::split_csv_line(line, lineno);
            for (auto& h : header) h = detail::trim(h);
            if (header != std::vector<std::string>{"name", "smiles", "ron", "label"})
                throw InputError("dataset header must be 'name,smiles,ron,label'");
            header_seen = true;
            continue;
        }
        try {
            auto f = detail::split_csv_line(line, lineno);
            if (f.size() != 4) throw InputError("expected 4 fields, found " + std::to_string(f.size()));
            CsvRecord rec;
            rec.line = lineno;
            rec.name = detail::trim(f[0]);
            rec.smiles = detail::trim(f[1]);
            const std::string ron = detail::trim(f[2]);
            const std::string label = detail::trim(f[3]);
            if (rec.smiles.empty()) throw InputError("empty SMILES");
            if (!ron.empty()) {
                double v = 0.0;
                auto [ptr, ec] = std::from_chars(ron.data(), ron.data() + ron.size(), v);
                if (ec != std::errc() || ptr != ron.data() + ron.size() || !std::isfinite(v))
                    throw InputError("invalid RON '" + ron + "'");
                rec.ron = v;
            }
            if (label == "high") {
                rec.label = RonClass::high;
            } else if (label == "low") {
                rec.label = RonClass::low;
            } else if (!label.empty()) {
                throw InputError("invalid label '" + label + "' (expected high or low)");
            }
            if (!rec.ron && !rec.label) throw InputError("row has neither ron nor label");
            if (rec.ron && rec.label && classify_ron(*rec.ron) != *rec.label)
                throw InputError("label '" + label + "' contradicts RON " + ron);
            out.push_back(std::move(rec));
        } catch (const InputError& e) {
            problems.push_back("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!header_seen) throw InputError("dataset is empty (no header)");
    if (!problems.empty()) {
        std::string msg = "invalid dataset rows:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw InputError(msg);
    }
    return out;
}

inline std::vector<CsvRecord> read_dataset_csv(const std::string& path) { return parse_dataset_csv(read_file(path)); }

/// Parses every SMILES and fingerprints it. Any failure aborts with the full
/// list of offending rows.
inline Dataset build_dataset(const std::vector<CsvRecord>& records, const PatternSet& patterns) {
    Dataset data;
    std::vector<std::string> problems;
    for (const auto& rec : records) {
        try {
            DatasetRow row;
            row.name = rec.name;
            row.smiles = rec.smiles;
            row.molecule = parse_smiles(rec.smiles);
            row.fingerprint = compute_fingerprint(*row.molecule, patterns);
            row.measured_ron = rec.ron;
            row.label = rec.ron ? classify_ron(*rec.ron) : *rec.label;
            data.add(std::move(row));
        } catch (const InputError& e) {
            problems.push_back("line " + std::to_string(rec.line) + " (" + rec.name + "): " + e.what());
        }
    }
    if (!problems.empty()) {
        std::string msg = "could not ingest " + std::to_string(problems.size()) + " row(s):";
        for (const auto& p : problems) msg += "\n  " + p;
        throw InputError(msg);
    }
    return data;
}

inline Dataset load_dataset(const std::string& path, const PatternSet& patterns) {
    return build_dataset(read_dataset_csv(path), patterns);
}

}  // namespace ronpaint
