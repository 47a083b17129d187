#include "vulnscreen/dataset.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "vulnscreen/errors.hpp"
#include "vulnscreen/prng.hpp"

namespace vulnscreen {

namespace {

// RFC 4180 record reader: quoted fields may contain commas, escaped quotes
// ("") and newlines. Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
    fields.clear();
    int c = in.get();
    if (c == EOF) return false;

    std::string field;
    bool in_quotes = false;
    bool any = false;
    while (true) {
        if (c == EOF) {
            fields.push_back(field);
            return true;
        }
        any = true;
        const char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line_no;
                field.push_back(ch);
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(field);
            field.clear();
        } else if (ch == '\r') {
            // swallow; the following \n (if any) ends the record
        } else if (ch == '\n') {
            ++line_no;
            fields.push_back(field);
            return true;
        } else {
            field.push_back(ch);
        }
        c = in.get();
    }
    (void)any;
}

bool is_integer(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

// Cell -> category code: exact label match first, then a numeric code
// checked against the category count.
int encode_cell(const SurveySchema& schema, const QuestionSpec& q, const std::string& cell,
                std::size_t line_no) {
    auto it = std::find(q.categories.begin(), q.categories.end(), cell);
    if (it != q.categories.end()) return static_cast<int>(it - q.categories.begin());
    if (is_integer(cell)) {
        const long code = std::stol(cell);
        if (code < 0 || code >= static_cast<long>(q.categories.size()))
            throw ValidationError("line " + std::to_string(line_no) + ", column " + q.id + ": code " +
                                  cell + " out of range [0, " + std::to_string(q.categories.size() - 1) +
                                  "]");
        return static_cast<int>(code);
    }
    (void)schema;
    throw ValidationError("line " + std::to_string(line_no) + ", column " + q.id +
                          ": unknown answer label '" + cell + "'");
}

void write_field(std::ostream& out, const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) {
        out << field;
        return;
    }
    out << '"';
    for (char c : field) {
        if (c == '"') out << "\"\"";
        else out << c;
    }
    out << '"';
}

Index round_half_up(Scalar x) { return static_cast<Index>(std::floor(x + 0.5)); }

}  // namespace

Dataset parse_csv_stream(std::istream& in, const SurveySchema& schema, const ParseOptions& options,
                         std::vector<std::string>* warnings) {
    std::size_t line_no = 1;
    std::vector<std::string> header;
    if (!read_record(in, header, line_no))
        throw ParseError("empty CSV: missing header row");

    // Resolve header -> schema questions (order-insensitive), the optional
    // "id" column and the target column.
    std::vector<const QuestionSpec*> columns(header.size(), nullptr);
    Index id_col = -1, label_col = -1;
    std::vector<std::string> feature_ids;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& name = header[c];
        if (name == "id" && id_col < 0) {
            id_col = static_cast<Index>(c);
        } else if (name == schema.target().name) {
            if (label_col >= 0) throw ParseError("duplicate target column '" + name + "'");
            label_col = static_cast<Index>(c);
        } else if (schema.has_question(name)) {
            if (std::find(feature_ids.begin(), feature_ids.end(), name) != feature_ids.end())
                throw ParseError("duplicate column '" + name + "'");
            columns[c] = &schema.question(name);
            feature_ids.push_back(name);
        } else {
            throw ParseError("unexpected column '" + name + "' not in schema");
        }
    }
    for (const auto& q : schema.questions()) {
        if (std::find(feature_ids.begin(), feature_ids.end(), q.id) == feature_ids.end())
            throw ParseError("missing column for question " + q.id);
    }
    if (options.labeled && label_col < 0)
        throw ParseError("missing target column '" + schema.target().name + "'");

    const Index p = static_cast<Index>(feature_ids.size());
    std::vector<Index> feature_pos(feature_ids.size());
    {
        Index k = 0;
        for (std::size_t c = 0; c < header.size(); ++c)
            if (columns[c] != nullptr) feature_pos[static_cast<std::size_t>(k++)] = static_cast<Index>(c);
    }

    struct PendingRow {
        std::vector<int> codes;          // -1 marks a missing cell
        std::vector<Index> missing_cols; // positions into feature_ids
        int label = -1;
        std::string row_id;
    };
    std::vector<PendingRow> rows;
    std::vector<std::string> record;
    while (true) {
        const std::size_t record_line = line_no;
        if (!read_record(in, record, line_no)) break;
        if (record.size() == 1 && record[0].empty()) continue;  // trailing blank line
        if (record.size() != header.size())
            throw ParseError("line " + std::to_string(record_line) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(record.size()));

        PendingRow row;
        row.codes.assign(static_cast<std::size_t>(p), -1);
        for (Index k = 0; k < p; ++k) {
            const auto c = static_cast<std::size_t>(feature_pos[static_cast<std::size_t>(k)]);
            const std::string& cell = record[c];
            if (cell.empty()) {
                row.missing_cols.push_back(k);
                continue;
            }
            row.codes[static_cast<std::size_t>(k)] = encode_cell(schema, *columns[c], cell, record_line);
        }
        if (id_col >= 0) row.row_id = record[static_cast<std::size_t>(id_col)];
        if (options.labeled) {
            const std::string& cell = record[static_cast<std::size_t>(label_col)];
            if (cell.empty()) {
                if (options.missing == MissingPolicy::Reject) {
                    if (warnings)
                        warnings->push_back("line " + std::to_string(record_line) +
                                            ": missing label, row rejected");
                    continue;
                }
                throw ValidationError("line " + std::to_string(record_line) +
                                      ": missing label cannot be imputed");
            }
            row.label = schema.encode_label(cell);
        }
        if (!row.missing_cols.empty() && options.missing == MissingPolicy::Reject) {
            if (warnings)
                warnings->push_back("line " + std::to_string(record_line) +
                                    ": missing cell(s), row rejected");
            continue;
        }
        rows.push_back(std::move(row));
    }

    // Most-frequent-value imputation, ties to the lowest code.
    if (options.missing == MissingPolicy::ImputeMostFrequent) {
        for (Index k = 0; k < p; ++k) {
            std::map<int, Index> counts;
            for (const auto& row : rows) {
                const int code = row.codes[static_cast<std::size_t>(k)];
                if (code >= 0) ++counts[code];
            }
            int fill = 0;
            Index best = -1;
            for (const auto& [code, count] : counts) {
                if (count > best) {
                    best = count;
                    fill = code;
                }
            }
            for (auto& row : rows) {
                auto& code = row.codes[static_cast<std::size_t>(k)];
                if (code < 0) {
                    code = fill;
                    if (warnings)
                        warnings->push_back("imputed column " +
                                            feature_ids[static_cast<std::size_t>(k)] + " with code " +
                                            std::to_string(fill));
                }
            }
        }
    }

    Dataset out;
    out.schema_fingerprint = schema.fingerprint();
    out.feature_ids = std::move(feature_ids);
    out.labeled = options.labeled;
    const Index n = static_cast<Index>(rows.size());
    out.codes.resize(n, p);
    if (options.labeled) out.labels.resize(n);
    const bool has_ids = id_col >= 0;
    if (has_ids) out.row_ids.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        for (Index k = 0; k < p; ++k) out.codes(i, k) = row.codes[static_cast<std::size_t>(k)];
        if (options.labeled) out.labels(i) = row.label;
        if (has_ids) out.row_ids.push_back(row.row_id);
    }
    return out;
}

Dataset parse_csv(const std::string& path, const SurveySchema& schema, const ParseOptions& options,
                  std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open data file: " + path);
    return parse_csv_stream(in, schema, options, warnings);
}

void write_csv(const Dataset& dataset, const SurveySchema& schema, std::ostream& out) {
    const bool has_ids = !dataset.row_ids.empty();
    bool first = true;
    auto sep = [&] {
        if (!first) out << ',';
        first = false;
    };
    if (has_ids) {
        sep();
        out << "id";
    }
    for (const auto& id : dataset.feature_ids) {
        sep();
        write_field(out, id);
    }
    if (dataset.labeled) {
        sep();
        write_field(out, schema.target().name);
    }
    out << '\n';

    for (Index i = 0; i < dataset.n_rows(); ++i) {
        first = true;
        if (has_ids) {
            sep();
            write_field(out, dataset.row_ids[static_cast<std::size_t>(i)]);
        }
        for (Index k = 0; k < dataset.n_features(); ++k) {
            sep();
            out << dataset.codes(i, k);
        }
        if (dataset.labeled) {
            sep();
            write_field(out, schema.decode_label(dataset.labels(i)));
        }
        out << '\n';
    }
}

void write_csv_file(const Dataset& dataset, const SurveySchema& schema, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open output file: " + path);
    write_csv(dataset, schema, out);
}

SplitIndices stratified_split(const Dataset& dataset, Scalar test_fraction, std::uint64_t seed) {
    if (!dataset.labeled) throw ValidationError("stratified_split: dataset has no labels");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ValidationError("test_fraction must lie in (0, 1)");

    std::vector<std::vector<Index>> by_class(2);
    for (Index i = 0; i < dataset.n_rows(); ++i)
        by_class[static_cast<std::size_t>(dataset.labels(i))].push_back(i);
    if (by_class[0].empty() || by_class[1].empty())
        throw ValidationError("stratified_split: both classes must be present");
    for (int c = 0; c < 2; ++c) {
        if (by_class[static_cast<std::size_t>(c)].size() < 2)
            throw ValidationError("stratified_split: class " + std::to_string(c) +
                                  " has fewer than 2 members");
    }

    const Index n = dataset.n_rows();
    const Index target_total = round_half_up(static_cast<Scalar>(n) * test_fraction);
    std::array<Index, 2> take{};
    for (int c = 0; c < 2; ++c) {
        const auto count = static_cast<Index>(by_class[static_cast<std::size_t>(c)].size());
        Index t = round_half_up(static_cast<Scalar>(count) * test_fraction);
        take[static_cast<std::size_t>(c)] = std::clamp<Index>(t, 1, count - 1);
    }
    // Charge any rounding residual to the larger class (class 0 on ties).
    const Index diff = take[0] + take[1] - target_total;
    if (diff != 0) {
        const int larger = by_class[0].size() >= by_class[1].size() ? 0 : 1;
        const auto count = static_cast<Index>(by_class[static_cast<std::size_t>(larger)].size());
        take[static_cast<std::size_t>(larger)] =
            std::clamp<Index>(take[static_cast<std::size_t>(larger)] - diff, 1, count - 1);
    }

    SplitIndices split;
    split.seed = seed;
    split.test_fraction = test_fraction;
    for (int c = 0; c < 2; ++c) {
        auto& members = by_class[static_cast<std::size_t>(c)];
        SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
        fisher_yates_shuffle(members, rng);
        const Index t = take[static_cast<std::size_t>(c)];
        for (Index i = 0; i < static_cast<Index>(members.size()); ++i) {
            if (i < t) split.test.push_back(members[static_cast<std::size_t>(i)]);
            else split.train.push_back(members[static_cast<std::size_t>(i)]);
        }
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

Dataset subset_rows(const Dataset& dataset, const std::vector<Index>& rows) {
    Dataset out;
    out.schema_fingerprint = dataset.schema_fingerprint;
    out.feature_ids = dataset.feature_ids;
    out.labeled = dataset.labeled;
    const Index n = static_cast<Index>(rows.size());
    out.codes.resize(n, dataset.n_features());
    if (dataset.labeled) out.labels.resize(n);
    if (!dataset.row_ids.empty()) out.row_ids.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const Index r = rows[static_cast<std::size_t>(i)];
        if (r < 0 || r >= dataset.n_rows())
            throw ValidationError("row index " + std::to_string(r) + " out of range");
        out.codes.row(i) = dataset.codes.row(r);
        if (dataset.labeled) out.labels(i) = dataset.labels(r);
        if (!dataset.row_ids.empty()) out.row_ids.push_back(dataset.row_ids[static_cast<std::size_t>(r)]);
    }
    return out;
}

Dataset select_columns(const Dataset& dataset, const std::vector<std::string>& feature_ids) {
    std::vector<Index> cols;
    cols.reserve(feature_ids.size());
    for (const auto& id : feature_ids) {
        auto it = std::find(dataset.feature_ids.begin(), dataset.feature_ids.end(), id);
        if (it == dataset.feature_ids.end())
            throw ValidationError("unknown feature: '" + id + "'");
        cols.push_back(static_cast<Index>(it - dataset.feature_ids.begin()));
    }

    Dataset out;
    out.schema_fingerprint = dataset.schema_fingerprint;
    out.feature_ids = feature_ids;
    out.labels = dataset.labels;
    out.row_ids = dataset.row_ids;
    out.labeled = dataset.labeled;
    out.codes.resize(dataset.n_rows(), static_cast<Index>(cols.size()));
    for (Index k = 0; k < static_cast<Index>(cols.size()); ++k)
        out.codes.col(k) = dataset.codes.col(cols[static_cast<std::size_t>(k)]);
    return out;
}

}  // namespace vulnscreen
