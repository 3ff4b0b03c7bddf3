#ifndef CADRE_BIF_HPP
#define CADRE_BIF_HPP

#include "cadre/dataset.hpp"
#include "cadre/error.hpp"
#include "cadre/graph.hpp"
#include "cadre/rng.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace cadre {

/// Discrete Bayesian network. Each node's CPT is stored row-major: one row per parent
/// configuration, one column per child category. Parent configurations are indexed in
/// mixed radix over `cpt_parents[v]` (header order), last parent varying fastest.
struct DiscreteBn {
    std::string name;
    Dag dag;
    std::vector<std::vector<std::string>> categories;
    std::vector<std::vector<NodeId>> cpt_parents;
    std::vector<std::vector<double>> cpts;

    int node_count() const noexcept { return dag.node_count(); }
    std::size_t cardinality(NodeId v) const { return categories.at(static_cast<std::size_t>(v)).size(); }

    std::size_t config_count(NodeId v) const {
        std::size_t q = 1;
        for (NodeId p : cpt_parents.at(static_cast<std::size_t>(v))) q *= cardinality(p);
        return q;
    }

    /// `parent_values` are category indices in `cpt_parents[v]` order.
    std::size_t config_index(NodeId v, std::span<const std::size_t> parent_values) const {
        std::size_t idx = 0;
        const auto& pa = cpt_parents.at(static_cast<std::size_t>(v));
        for (std::size_t i = 0; i < pa.size(); ++i) idx = idx * cardinality(pa[i]) + parent_values[i];
        return idx;
    }

    double probability(NodeId v, std::size_t config, std::size_t category) const {
        return cpts.at(static_cast<std::size_t>(v)).at(config * cardinality(v) + category);
    }
};

class BifError : public ParseError {
public:
    enum class Kind {
        Syntax,
        UndeclaredVariable,
        NonNormalizedRow,
        DuplicateDeclaration,
        CyclicStructure,
        IncompleteTable,
    };

    BifError(Kind kind, const std::string& message) : ParseError(message), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

namespace detail {

class BifLexer {
public:
    struct Token {
        enum class Type { Word, Punct, End } type = Type::End;
        std::string text;
        int line = 0;
        int column = 0;
    };

    explicit BifLexer(std::string_view src) : src_(src) {}

    const Token& peek() {
        if (!lookahead_) lookahead_ = lex();
        return *lookahead_;
    }

    Token next() {
        Token t = peek();
        lookahead_.reset();
        return t;
    }

    [[noreturn]] static void fail(const Token& at, const std::string& what) {
        throw BifError(BifError::Kind::Syntax, "bif " + std::to_string(at.line) + ":" +
                                                   std::to_string(at.column) + ": " + what);
    }

    Token expect(std::string_view punct_or_word) {
        Token t = next();
        if (t.type == Token::Type::End || t.text != punct_or_word)
            fail(t, "expected '" + std::string(punct_or_word) + "', found '" + describe(t) + "'");
        return t;
    }

    Token expect_word() {
        Token t = next();
        if (t.type != Token::Type::Word) fail(t, "expected identifier, found '" + describe(t) + "'");
        return t;
    }

    bool accept(std::string_view punct) {
        const auto& t = peek();
        if (t.type == Token::Type::Punct && t.text == punct) {
            next();
            return true;
        }
        return false;
    }

    static std::string describe(const Token& t) { return t.type == Token::Type::End ? "end of input" : t.text; }

private:
    static bool is_punct(char c) {
        return c == '{' || c == '}' || c == '[' || c == ']' || c == '(' || c == ')' || c == ';' ||
               c == ',' || c == '|';
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_space_and_comments() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (src_.compare(pos_, 2, "//") == 0) {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (src_.compare(pos_, 2, "/*") == 0) {
                const int l = line_, col = column_;
                advance();
                advance();
                while (pos_ < src_.size() && src_.compare(pos_, 2, "*/") != 0) advance();
                if (pos_ >= src_.size()) fail(Token{Token::Type::End, "", l, col}, "unterminated comment");
                advance();
                advance();
            } else {
                break;
            }
        }
    }

    Token lex() {
        skip_space_and_comments();
        Token t;
        t.line = line_;
        t.column = column_;
        if (pos_ >= src_.size()) return t;
        const char c = src_[pos_];
        if (is_punct(c)) {
            t.type = Token::Type::Punct;
            t.text = std::string(1, c);
            advance();
            return t;
        }
        t.type = Token::Type::Word;
        if (c == '"') {
            advance();
            while (pos_ < src_.size() && src_[pos_] != '"') {
                t.text.push_back(src_[pos_]);
                advance();
            }
            if (pos_ >= src_.size()) fail(t, "unterminated quoted identifier");
            advance();
            return t;
        }
        while (pos_ < src_.size()) {
            const char d = src_[pos_];
            if (d == ' ' || d == '\t' || d == '\r' || d == '\n' || is_punct(d)) break;
            t.text.push_back(d);
            advance();
        }
        return t;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
    std::optional<Token> lookahead_;
};

inline double parse_probability(const BifLexer::Token& t) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (t.type != BifLexer::Token::Type::Word || ec != std::errc() ||
        ptr != t.text.data() + t.text.size())
        BifLexer::fail(t, "expected a probability, found '" + BifLexer::describe(t) + "'");
    if (!(v >= 0.0 && v <= 1.0)) BifLexer::fail(t, "probability outside [0, 1]: " + t.text);
    return v;
}

inline std::vector<double> parse_number_list(BifLexer& lex) {
    std::vector<double> values{parse_probability(lex.next())};
    while (lex.accept(",")) values.push_back(parse_probability(lex.next()));
    lex.expect(";");
    return values;
}

inline void skip_property(BifLexer& lex) {
    while (true) {
        auto t = lex.next();
        if (t.type == BifLexer::Token::Type::End) BifLexer::fail(t, "unterminated property");
        if (t.type == BifLexer::Token::Type::Punct && t.text == ";") return;
    }
}

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace detail

/// Parses the BIF subset: `network`, discrete `variable` blocks, and `probability` blocks
/// made of `table` (root nodes only), `default`, and per-configuration `(...)` rows.
/// `property` entries are accepted and ignored. Identifiers may be double-quoted.
inline DiscreteBn parse_bif(std::string_view text) {
    using Kind = BifError::Kind;
    using Token = detail::BifLexer::Token;
    detail::BifLexer lex(text);

    struct ProbabilityBlock {
        Token at;
        NodeId child = -1;
        std::vector<NodeId> parents;
        std::vector<double> table;
        std::optional<std::vector<double>> default_row;
        std::vector<std::pair<Token, std::vector<std::string>>> row_keys;
        std::vector<std::vector<double>> row_values;
    };

    DiscreteBn bn;
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> categories;
    std::map<std::string, NodeId> index;
    std::vector<ProbabilityBlock> blocks;
    std::vector<bool> has_block;
    bool seen_network = false;

    while (lex.peek().type != Token::Type::End) {
        const Token keyword = lex.expect_word();
        if (keyword.text == "network") {
            if (seen_network) throw BifError(Kind::DuplicateDeclaration, "duplicate network block");
            seen_network = true;
            bn.name = lex.expect_word().text;
            lex.expect("{");
            while (!lex.accept("}")) {
                const Token t = lex.expect_word();
                if (t.text != "property") detail::BifLexer::fail(t, "unexpected '" + t.text + "' in network block");
                detail::skip_property(lex);
            }
        } else if (keyword.text == "variable") {
            const Token name = lex.expect_word();
            if (index.count(name.text))
                throw BifError(Kind::DuplicateDeclaration, "variable '" + name.text + "' declared twice");
            lex.expect("{");
            std::optional<std::vector<std::string>> cats;
            while (!lex.accept("}")) {
                const Token t = lex.expect_word();
                if (t.text == "property") {
                    detail::skip_property(lex);
                    continue;
                }
                if (t.text != "type") detail::BifLexer::fail(t, "unexpected '" + t.text + "' in variable block");
                const Token kind = lex.expect_word();
                if (kind.text != "discrete")
                    detail::BifLexer::fail(kind, "only discrete variables are supported");
                lex.expect("[");
                const Token count_tok = lex.expect_word();
                std::size_t count = 0;
                auto [ptr, ec] = std::from_chars(count_tok.text.data(),
                                                 count_tok.text.data() + count_tok.text.size(), count);
                if (ec != std::errc() || ptr != count_tok.text.data() + count_tok.text.size() || count == 0)
                    detail::BifLexer::fail(count_tok, "expected a positive category count");
                lex.expect("]");
                lex.expect("{");
                std::vector<std::string> values{lex.expect_word().text};
                while (lex.accept(",")) values.push_back(lex.expect_word().text);
                lex.expect("}");
                lex.expect(";");
                if (values.size() != count)
                    detail::BifLexer::fail(count_tok, "variable '" + name.text + "' declares " +
                                                          std::to_string(count) + " categories but lists " +
                                                          std::to_string(values.size()));
                for (std::size_t i = 0; i < values.size(); ++i)
                    for (std::size_t j = 0; j < i; ++j)
                        if (values[i] == values[j])
                            throw BifError(Kind::DuplicateDeclaration, "variable '" + name.text +
                                                                           "' repeats category '" + values[i] + "'");
                if (cats) throw BifError(Kind::DuplicateDeclaration, "variable '" + name.text + "' has two type entries");
                cats = std::move(values);
            }
            if (!cats) detail::BifLexer::fail(name, "variable '" + name.text + "' has no type entry");
            index.emplace(name.text, static_cast<NodeId>(names.size()));
            names.push_back(name.text);
            categories.push_back(std::move(*cats));
        } else if (keyword.text == "probability") {
            ProbabilityBlock block;
            block.at = keyword;
            lex.expect("(");
            auto resolve = [&](const Token& t) {
                auto it = index.find(t.text);
                if (it == index.end())
                    throw BifError(Kind::UndeclaredVariable, "bif " + std::to_string(t.line) + ":" +
                                                                 std::to_string(t.column) + ": variable '" +
                                                                 t.text + "' is not declared");
                return it->second;
            };
            block.child = resolve(lex.expect_word());
            if (lex.accept("|")) {
                block.parents.push_back(resolve(lex.expect_word()));
                while (lex.accept(",")) block.parents.push_back(resolve(lex.expect_word()));
            }
            lex.expect(")");
            for (std::size_t i = 0; i < block.parents.size(); ++i) {
                if (block.parents[i] == block.child)
                    throw BifError(Kind::CyclicStructure, "variable '" + names[block.child] + "' is its own parent");
                for (std::size_t j = 0; j < i; ++j)
                    if (block.parents[i] == block.parents[j])
                        throw BifError(Kind::DuplicateDeclaration, "parent '" + names[block.parents[i]] +
                                                                       "' listed twice for '" + names[block.child] + "'");
            }
            lex.expect("{");
            while (!lex.accept("}")) {
                if (lex.peek().type == Token::Type::Punct && lex.peek().text == "(") {
                    const Token open = lex.next();
                    std::vector<std::string> key{lex.expect_word().text};
                    while (lex.accept(",")) key.push_back(lex.expect_word().text);
                    lex.expect(")");
                    block.row_keys.emplace_back(open, std::move(key));
                    block.row_values.push_back(detail::parse_number_list(lex));
                    continue;
                }
                const Token t = lex.expect_word();
                if (t.text == "table") {
                    if (!block.table.empty()) detail::BifLexer::fail(t, "second table entry");
                    if (!block.parents.empty())
                        detail::BifLexer::fail(t, "'table' is only supported for variables without parents; "
                                                  "use per-configuration rows");
                    block.table = detail::parse_number_list(lex);
                } else if (t.text == "default") {
                    if (block.default_row) detail::BifLexer::fail(t, "second default entry");
                    block.default_row = detail::parse_number_list(lex);
                } else if (t.text == "property") {
                    detail::skip_property(lex);
                } else {
                    detail::BifLexer::fail(t, "unexpected '" + t.text + "' in probability block");
                }
            }
            blocks.push_back(std::move(block));
        } else {
            detail::BifLexer::fail(keyword, "unexpected '" + keyword.text + "' at top level");
        }
    }

    const int n = static_cast<int>(names.size());
    bn.dag = Dag(names);
    bn.categories = categories;
    bn.cpt_parents.assign(static_cast<std::size_t>(n), {});
    bn.cpts.assign(static_cast<std::size_t>(n), {});
    has_block.assign(static_cast<std::size_t>(n), false);

    for (auto& block : blocks) {
        const NodeId v = block.child;
        const auto& name = names[v];
        if (has_block[v])
            throw BifError(Kind::DuplicateDeclaration, "variable '" + name + "' has two probability blocks");
        has_block[v] = true;
        bn.cpt_parents[v] = block.parents;
        for (NodeId p : block.parents) {
            try {
                bn.dag.add_edge(p, v);
            } catch (const GraphError&) {
                throw BifError(Kind::CyclicStructure, "edge " + names[p] + " -> " + name + " closes a cycle");
            }
        }
        const std::size_t r = bn.cardinality(v);
        const std::size_t q = bn.config_count(v);
        auto check_row = [&](const std::vector<double>& row, const std::string& where) {
            if (row.size() != r)
                throw BifError(Kind::IncompleteTable, "variable '" + name + "' " + where + ": expected " +
                                                          std::to_string(r) + " probabilities, got " +
                                                          std::to_string(row.size()));
            double sum = 0;
            for (double x : row) sum += x;
            if (std::abs(sum - 1.0) > 1e-6)
                throw BifError(Kind::NonNormalizedRow, "variable '" + name + "' " + where +
                                                           ": probabilities sum to " + detail::format_double(sum));
        };

        auto& cpt = bn.cpts[v];
        if (!block.table.empty()) {
            if (!block.row_keys.empty() || block.default_row)
                throw BifError(Kind::Syntax, "variable '" + name + "' mixes table and row entries");
            check_row(block.table, "table");
            cpt = block.table;
            continue;
        }
        cpt.assign(q * r, 0.0);
        std::vector<bool> filled(q, false);
        for (std::size_t k = 0; k < block.row_keys.size(); ++k) {
            const auto& [tok, key] = block.row_keys[k];
            const std::string where = "row at " + std::to_string(tok.line) + ":" + std::to_string(tok.column);
            if (key.size() != block.parents.size())
                detail::BifLexer::fail(tok, "row key has " + std::to_string(key.size()) + " values, expected " +
                                                std::to_string(block.parents.size()));
            std::size_t config = 0;
            for (std::size_t i = 0; i < key.size(); ++i) {
                const auto& cats = bn.categories[block.parents[i]];
                auto it = std::find(cats.begin(), cats.end(), key[i]);
                if (it == cats.end())
                    detail::BifLexer::fail(tok, "'" + key[i] + "' is not a category of '" +
                                                    names[block.parents[i]] + "'");
                config = config * cats.size() + static_cast<std::size_t>(it - cats.begin());
            }
            if (filled[config])
                throw BifError(Kind::DuplicateDeclaration, "variable '" + name + "' " + where +
                                                               ": configuration given twice");
            check_row(block.row_values[k], where);
            std::copy(block.row_values[k].begin(), block.row_values[k].end(),
                      cpt.begin() + static_cast<std::ptrdiff_t>(config * r));
            filled[config] = true;
        }
        if (block.default_row) check_row(*block.default_row, "default row");
        for (std::size_t c = 0; c < q; ++c) {
            if (filled[c]) continue;
            if (!block.default_row)
                throw BifError(Kind::IncompleteTable, "variable '" + name + "' is missing parent configuration " +
                                                          std::to_string(c));
            std::copy(block.default_row->begin(), block.default_row->end(),
                      cpt.begin() + static_cast<std::ptrdiff_t>(c * r));
        }
    }
    for (NodeId v = 0; v < n; ++v)
        if (!has_block[v])
            throw BifError(Kind::IncompleteTable, "variable '" + names[v] + "' has no probability block");
    return bn;
}

/// Writes `bn` in the subset accepted by parse_bif. Numbers use the shortest representation
/// that round-trips exactly.
inline void write_bif(std::ostream& os, const DiscreteBn& bn) {
    os << "network " << (bn.name.empty() ? "unknown" : bn.name) << " {\n}\n";
    const int n = bn.node_count();
    for (NodeId v = 0; v < n; ++v) {
        const auto& cats = bn.categories[v];
        os << "variable " << bn.dag.labels()[v] << " {\n  type discrete [ " << cats.size() << " ] { ";
        for (std::size_t k = 0; k < cats.size(); ++k) os << (k ? ", " : "") << cats[k];
        os << " };\n}\n";
    }
    for (NodeId v = 0; v < n; ++v) {
        const auto& pa = bn.cpt_parents[v];
        const std::size_t r = bn.cardinality(v);
        os << "probability ( " << bn.dag.labels()[v];
        for (std::size_t i = 0; i < pa.size(); ++i) os << (i ? ", " : " | ") << bn.dag.labels()[pa[i]];
        os << " ) {\n";
        auto write_row = [&](std::size_t config) {
            for (std::size_t k = 0; k < r; ++k)
                os << (k ? ", " : "") << detail::format_double(bn.cpts[v][config * r + k]);
            os << ";\n";
        };
        if (pa.empty()) {
            os << "  table ";
            write_row(0);
        } else {
            const std::size_t q = bn.config_count(v);
            std::vector<std::size_t> digits(pa.size(), 0);
            for (std::size_t c = 0; c < q; ++c) {
                os << "  (";
                for (std::size_t i = 0; i < pa.size(); ++i)
                    os << (i ? ", " : "") << bn.categories[pa[i]][digits[i]];
                os << ") ";
                write_row(c);
                for (std::size_t i = pa.size(); i-- > 0;) {
                    if (++digits[i] < bn.cardinality(pa[i])) break;
                    digits[i] = 0;
                }
            }
        }
        os << "}\n";
    }
}

inline std::string to_bif(const DiscreteBn& bn) {
    std::ostringstream os;
    write_bif(os, bn);
    return os.str();
}

/// Ancestral sampling: each row draws every node from its CPT row given the already-drawn
/// parent values, visiting nodes in topological order.
inline Dataset sample_bn(const DiscreteBn& bn, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample size must be at least 1");
    const int p = bn.node_count();
    const auto order = bn.dag.topological_order();
    std::vector<Dataset::Code> codes(n * static_cast<std::size_t>(p));
    Rng rng(derive_seed(seed, "bn-ancestral"));
    std::vector<std::size_t> parent_values;
    for (std::size_t i = 0; i < n; ++i) {
        for (NodeId v : order) {
            const auto& pa = bn.cpt_parents[v];
            parent_values.resize(pa.size());
            for (std::size_t k = 0; k < pa.size(); ++k)
                parent_values[k] = codes[static_cast<std::size_t>(pa[k]) * n + i];
            const std::size_t config = bn.config_index(v, parent_values);
            const std::size_t r = bn.cardinality(v);
            const double* row = bn.cpts[v].data() + config * r;
            const double u = rng.uniform();
            double acc = 0.0;
            std::size_t pick = r;
            std::size_t last_positive = 0;
            for (std::size_t k = 0; k < r; ++k) {
                if (row[k] > 0.0) last_positive = k;
                acc += row[k];
                if (pick == r && u < acc && row[k] > 0.0) pick = k;
            }
            if (pick == r) pick = last_positive;
            codes[static_cast<std::size_t>(v) * n + i] = static_cast<Dataset::Code>(pick);
        }
    }
    return Dataset::categorical(bn.dag.labels(), n, std::move(codes), bn.categories);
}

} // namespace cadre

#endif // CADRE_BIF_HPP
