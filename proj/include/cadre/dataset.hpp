#ifndef CADRE_DATASET_HPP
#define CADRE_DATASET_HPP

#include "cadre/error.hpp"
#include "cadre/graph.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace cadre {

enum class DataKind { Continuous, Categorical };

/// Column-major data matrix. All columns share one kind. Categorical values are category
/// indices into a per-column label list; cardinalities come from that list, not from the
/// values observed.
class Dataset {
public:
    using Code = std::uint16_t;

    Dataset() = default;

    static Dataset continuous(std::vector<std::string> labels, std::size_t rows,
                              std::vector<double> column_major) {
        if (rows == 0) throw std::invalid_argument("dataset must have at least one row");
        if (column_major.size() != rows * labels.size())
            throw std::invalid_argument("value count does not match rows x columns");
        for (double v : column_major)
            if (!std::isfinite(v)) throw std::invalid_argument("dataset contains non-finite values");
        Dataset d;
        d.kind_ = DataKind::Continuous;
        d.rows_ = rows;
        d.labels_ = std::move(labels);
        d.real_ = std::move(column_major);
        return d;
    }

    static Dataset categorical(std::vector<std::string> labels, std::size_t rows,
                               std::vector<Code> column_major,
                               std::vector<std::vector<std::string>> categories) {
        if (rows == 0) throw std::invalid_argument("dataset must have at least one row");
        if (column_major.size() != rows * labels.size() || categories.size() != labels.size())
            throw std::invalid_argument("value count does not match rows x columns");
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (categories[j].empty()) throw std::invalid_argument("column with no categories");
            for (std::size_t i = 0; i < rows; ++i)
                if (column_major[j * rows + i] >= categories[j].size())
                    throw std::invalid_argument("category index out of range in column " +
                                                labels[j]);
        }
        Dataset d;
        d.kind_ = DataKind::Categorical;
        d.rows_ = rows;
        d.labels_ = std::move(labels);
        d.codes_ = std::move(column_major);
        d.categories_ = std::move(categories);
        return d;
    }

    DataKind kind() const noexcept { return kind_; }
    std::size_t rows() const noexcept { return rows_; }
    int columns() const noexcept { return static_cast<int>(labels_.size()); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    std::span<const double> column(int j) const {
        require(DataKind::Continuous);
        return {real_.data() + static_cast<std::size_t>(j) * rows_, rows_};
    }

    std::span<const Code> codes(int j) const {
        require(DataKind::Categorical);
        return {codes_.data() + static_cast<std::size_t>(j) * rows_, rows_};
    }

    const std::vector<std::string>& categories(int j) const {
        require(DataKind::Categorical);
        return categories_.at(static_cast<std::size_t>(j));
    }
    const std::vector<std::vector<std::string>>& all_categories() const noexcept {
        return categories_;
    }

    std::size_t cardinality(int j) const { return categories(j).size(); }

    /// Copy of the rows named by `rows` (repeats allowed), preserving column metadata.
    Dataset select_rows(std::span<const std::size_t> rows) const {
        for (auto r : rows)
            if (r >= rows_) throw std::out_of_range("row index " + std::to_string(r) + " out of range");
        const std::size_t m = rows.size();
        const auto p = static_cast<std::size_t>(columns());
        if (kind_ == DataKind::Continuous) {
            std::vector<double> out(m * p);
            for (std::size_t j = 0; j < p; ++j)
                for (std::size_t i = 0; i < m; ++i) out[j * m + i] = real_[j * rows_ + rows[i]];
            return continuous(labels_, m, std::move(out));
        }
        std::vector<Code> out(m * p);
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t i = 0; i < m; ++i) out[j * m + i] = codes_[j * rows_ + rows[i]];
        return categorical(labels_, m, std::move(out), categories_);
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    void require(DataKind k) const {
        if (kind_ != k)
            throw std::logic_error(k == DataKind::Continuous ? "dataset is not continuous"
                                                             : "dataset is not categorical");
    }

    DataKind kind_ = DataKind::Continuous;
    std::size_t rows_ = 0;
    std::vector<std::string> labels_;
    std::vector<double> real_;
    std::vector<Code> codes_;
    std::vector<std::vector<std::string>> categories_;
};

// ---------------------------------------------------------------------------
// CSV: header of column labels, one row per sample. Continuous values are written with
// 17 significant digits; categorical values as their category labels.

inline void write_csv(std::ostream& os, const Dataset& d) {
    const int p = d.columns();
    for (int j = 0; j < p; ++j) os << (j ? "," : "") << d.labels()[j];
    os << '\n';
    char buf[40];
    for (std::size_t i = 0; i < d.rows(); ++i) {
        for (int j = 0; j < p; ++j) {
            if (j) os << ',';
            if (d.kind() == DataKind::Continuous) {
                std::snprintf(buf, sizeof buf, "%.17g", d.column(j)[i]);
                os << buf;
            } else {
                os << d.categories(j)[d.codes(j)[i]];
            }
        }
        os << '\n';
    }
}

/// Reads a CSV. For categorical data, `categories` (when given) fixes each column's
/// category list; otherwise the sorted set of observed labels is used.
inline Dataset read_csv(std::istream& is, DataKind kind,
                        const std::optional<std::vector<std::vector<std::string>>>& categories = {}) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("csv: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> labels;
    for (auto& l : detail::split(line, ',')) labels.emplace_back(detail::trim(l));
    const std::size_t p = labels.size();
    std::vector<std::vector<std::string>> cells(p);
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split(line, ',');
        if (fields.size() != p)
            throw ParseError("csv row " + std::to_string(rows + 1) + ": expected " +
                             std::to_string(p) + " fields, got " + std::to_string(fields.size()));
        for (std::size_t j = 0; j < p; ++j) cells[j].emplace_back(detail::trim(fields[j]));
        ++rows;
    }
    if (rows == 0) throw ParseError("csv: no data rows");

    if (kind == DataKind::Continuous) {
        std::vector<double> values(rows * p);
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t i = 0; i < rows; ++i) {
                const auto& s = cells[j][i];
                double v = 0;
                auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
                if (ec != std::errc() || ptr != s.data() + s.size())
                    throw ParseError("csv row " + std::to_string(i + 1) + ", column " + labels[j] +
                                     ": not a number: '" + s + "'");
                values[j * rows + i] = v;
            }
        return Dataset::continuous(std::move(labels), rows, std::move(values));
    }

    std::vector<std::vector<std::string>> cats(p);
    if (categories) {
        if (categories->size() != p) throw ParseError("csv: category list count mismatch");
        cats = *categories;
    } else {
        for (std::size_t j = 0; j < p; ++j) {
            std::map<std::string, int> seen;
            for (auto& s : cells[j]) seen.emplace(s, 0);
            for (auto& [k, v] : seen) cats[j].push_back(k);
        }
    }
    std::vector<Dataset::Code> codes(rows * p);
    for (std::size_t j = 0; j < p; ++j) {
        std::map<std::string, Dataset::Code> index;
        for (std::size_t k = 0; k < cats[j].size(); ++k)
            index.emplace(cats[j][k], static_cast<Dataset::Code>(k));
        for (std::size_t i = 0; i < rows; ++i) {
            auto it = index.find(cells[j][i]);
            if (it == index.end())
                throw ParseError("csv row " + std::to_string(i + 1) + ", column " + labels[j] +
                                 ": unknown category '" + cells[j][i] + "'");
            codes[j * rows + i] = it->second;
        }
    }
    return Dataset::categorical(std::move(labels), rows, std::move(codes), std::move(cats));
}

} // namespace cadre

#endif // CADRE_DATASET_HPP
