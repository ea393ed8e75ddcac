#include "icicl/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "icicl/error.hpp"
#include "icicl/log.hpp"
#include "icicl/text.hpp"

namespace icicl::eval {

namespace {

double percent(std::size_t hits, std::size_t total) {
    return total == 0 ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(total);
}

std::string fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Splits CSV text into records of fields (RFC 4180 quoting). Each record keeps
// the line number it starts on.
std::vector<std::pair<std::size_t, std::vector<std::string>>> parse_csv(std::string_view text) {
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
    std::vector<std::string> fields;
    std::string field;
    std::size_t line = 1;
    std::size_t row_line = 1;
    bool quoted = false;
    bool field_started = false;
    bool after_quote = false;
    auto end_field = [&] {
        fields.push_back(std::move(field));
        field.clear();
        field_started = false;
        after_quote = false;
    };
    auto end_row = [&] {
        end_field();
        bool blank = fields.size() == 1 && text::trim(fields[0]).empty();
        if (!blank) {
            rows.emplace_back(row_line, std::move(fields));
        }
        fields.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                    after_quote = true;
                }
            } else {
                if (c == '\n') {
                    ++line;
                }
                field.push_back(c);
            }
            continue;
        }
        if (c == ',') {
            end_field();
        } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
            continue;
        } else if (c == '\n') {
            end_row();
            ++line;
            row_line = line;
        } else if (c == '"' && !field_started) {
            quoted = true;
            field_started = true;
        } else {
            if (after_quote) {
                throw malformed_labels(line, "unexpected text after closing quote");
            }
            field.push_back(c);
            field_started = true;
        }
    }
    if (quoted) {
        throw malformed_labels(row_line, "unterminated quoted field");
    }
    end_row();
    return rows;
}

}  // namespace

bool metric_type_correct(const generation_record& record) {
    const auto& type = record.parameter.declared_type;
    if (!record.greedy || !postprocess::type_check(*record.greedy, type)) {
        return false;
    }
    return std::all_of(record.diverse_raw.begin(), record.diverse_raw.end(), [&](const auto& slot) {
        return !slot || postprocess::type_check(*slot, type);
    });
}

bool metric_unique(const generation_record& record) {
    std::set<std::string> distinct;
    for (const auto& slot : record.diverse_raw) {
        if (slot) {
            distinct.insert(slot->folded());
        }
    }
    return distinct.size() >= 3;
}

std::optional<double> metric_diversity(const postprocess::example_set& set, embedding::provider& embedder) {
    const auto n = set.examples.size();
    if (n < 2) {
        return std::nullopt;
    }
    std::vector<embedding::vector> vectors;
    vectors.reserve(n);
    for (const auto& e : set.examples) {
        vectors.push_back(embedder.embed(e.text()));
    }
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            sum += embedding::cosine(vectors[i], vectors[j]);
            ++pairs;
        }
    }
    return std::clamp(1.0 - sum / static_cast<double>(pairs), 0.0, 1.0);
}

eval::aggregates aggregate(std::span<const parameter_metrics> rows) {
    eval::aggregates out;
    std::size_t type_hits = 0, unique_hits = 0, both_hits = 0, labeled = 0, correct = 0, div_count = 0;
    double div_sum = 0.0;
    for (const auto& r : rows) {
        type_hits += r.type_correct;
        unique_hits += r.unique;
        both_hits += r.both;
        if (r.diversity) {
            div_sum += *r.diversity;
            ++div_count;
        }
        if (r.correct_label) {
            ++labeled;
            correct += *r.correct_label;
        }
    }
    out.type_pct = percent(type_hits, rows.size());
    out.unique_pct = percent(unique_hits, rows.size());
    out.both_pct = percent(both_hits, rows.size());
    if (div_count > 0) {
        out.mean_diversity = div_sum / static_cast<double>(div_count);
    }
    if (labeled > 0) {
        out.correct_pct = percent(correct, labeled);
    }
    return out;
}

intrinsic_report evaluate(std::span<const generation_record> records, embedding::provider& embedder) {
    intrinsic_report report;
    report.embedder_id = embedder.id();
    for (const auto& r : records) {
        parameter_metrics m;
        m.api_name = r.parameter.api_name;
        m.source_pointer = r.parameter.source_pointer;
        m.param_name = r.parameter.param_name;
        m.type_correct = metric_type_correct(r);
        m.unique = metric_unique(r);
        m.both = m.type_correct && m.unique;
        if (r.final) {
            m.diversity = metric_diversity(*r.final, embedder);
        }
        report.per_parameter.push_back(std::move(m));
    }
    report.aggregates = aggregate(report.per_parameter);
    return report;
}

intrinsic_report ingest_labels(intrinsic_report report, std::string_view csv_text) {
    auto rows = parse_csv(csv_text);
    std::map<std::pair<std::string, std::string>, std::pair<bool, std::size_t>> labels;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& [line, fields] = rows[r];
        if (fields.size() != 3) {
            throw malformed_labels(line, "expected 3 fields, got " + std::to_string(fields.size()));
        }
        const auto flag = text::trim(fields[2]);
        if (r == 0 && text::trim(fields[0]) == "api_name" && text::trim(fields[1]) == "source_pointer") {
            continue;
        }
        if (flag != "0" && flag != "1") {
            throw malformed_labels(line, "correct must be 0 or 1");
        }
        auto key = std::make_pair(std::string(text::trim(fields[0])), std::string(text::trim(fields[1])));
        auto [it, inserted] = labels.insert_or_assign(key, std::make_pair(flag == "1", line));
        if (!inserted) {
            log::warn("duplicate label for " + key.first + " " + key.second + " at line " +
                      std::to_string(line) + "; the later row wins");
        }
    }
    std::set<std::pair<std::string, std::string>> matched;
    for (auto& m : report.per_parameter) {
        auto it = labels.find({m.api_name, m.source_pointer});
        if (it != labels.end()) {
            m.correct_label = it->second.first;
            matched.insert(it->first);
        }
    }
    for (const auto& [key, value] : labels) {
        if (!matched.contains(key)) {
            log::warn("label at line " + std::to_string(value.second) + " matches no record: " + key.first + " " +
                      key.second);
        }
    }
    report.aggregates = aggregate(report.per_parameter);
    return report;
}

intrinsic_report ingest_labels_file(intrinsic_report report, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw error("cannot read labels file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return ingest_labels(std::move(report), buf.str());
}

json to_json(const intrinsic_report& report) {
    json rows = json::array();
    for (const auto& m : report.per_parameter) {
        rows.push_back(json{{"api_name", m.api_name},
                            {"source_pointer", m.source_pointer},
                            {"param_name", m.param_name},
                            {"type_correct", m.type_correct},
                            {"unique", m.unique},
                            {"both", m.both},
                            {"diversity", optional_number(m.diversity)},
                            {"correct_label", m.correct_label ? json(*m.correct_label) : json(nullptr)}});
    }
    const auto& a = report.aggregates;
    json agg{{"count", report.per_parameter.size()},
             {"type_pct", a.type_pct},
             {"unique_pct", a.unique_pct},
             {"both_pct", a.both_pct},
             {"mean_diversity", optional_number(a.mean_diversity)}};
    if (a.correct_pct) {
        agg["correct_pct"] = *a.correct_pct;
    }
    return json{{"embedder", report.embedder_id}, {"per_parameter", std::move(rows)}, {"aggregates", std::move(agg)}};
}

std::string to_csv(const intrinsic_report& report) {
    auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\r\n") == std::string::npos) {
            return s;
        }
        std::string out = "\"";
        for (char c : s) {
            out += c;
            if (c == '"') {
                out += '"';
            }
        }
        return out + "\"";
    };
    std::string out = "api_name,source_pointer,param_name,type_correct,unique,both,diversity,correct_label\n";
    for (const auto& m : report.per_parameter) {
        out += quote(m.api_name) + "," + quote(m.source_pointer) + "," + quote(m.param_name) + ",";
        out += std::string(m.type_correct ? "1" : "0") + "," + (m.unique ? "1" : "0") + "," + (m.both ? "1" : "0") + ",";
        out += (m.diversity ? fixed(*m.diversity, 6) : "") + ",";
        out += (m.correct_label ? (*m.correct_label ? "1" : "0") : "");
        out += "\n";
    }
    return out;
}

std::string table_row(const intrinsic_report& report) {
    const auto& a = report.aggregates;
    std::string header = "Type\tUnique\tBoth\tDiv";
    std::string row = fixed(a.type_pct, 1) + "%\t" + fixed(a.unique_pct, 1) + "%\t" + fixed(a.both_pct, 1) + "%\t" +
                      (a.mean_diversity ? fixed(*a.mean_diversity, 3) : "-");
    if (a.correct_pct) {
        header += "\tCorrect";
        row += "\t" + fixed(*a.correct_pct, 1) + "%";
    }
    return header + "\n" + row + "\n";
}

json to_json(const generation_record& record) {
    json diverse = json::array();
    for (const auto& slot : record.diverse_raw) {
        diverse.push_back(slot ? icicl::to_json(*slot) : json(nullptr));
    }
    return json{{"parameter", icicl::to_json(record.parameter)},
                {"greedy", record.greedy ? icicl::to_json(*record.greedy) : json(nullptr)},
                {"diverse_raw", std::move(diverse)},
                {"final", record.final ? postprocess::to_json(*record.final) : json(nullptr)}};
}

generation_record record_from_json(const json& j) {
    if (!j.is_object() || j.size() != 4) {
        throw error("record must have exactly parameter, greedy, diverse_raw and final");
    }
    generation_record out;
    out.parameter = api_parameter_from_json(j.at("parameter"));
    if (const auto& g = j.at("greedy"); !g.is_null()) {
        out.greedy = example_value_from_json(g);
    }
    const auto& diverse = j.at("diverse_raw");
    if (!diverse.is_array()) {
        throw error("diverse_raw must be an array");
    }
    for (const auto& slot : diverse) {
        out.diverse_raw.push_back(slot.is_null() ? std::nullopt : std::optional(example_value_from_json(slot)));
    }
    if (const auto& f = j.at("final"); !f.is_null()) {
        out.final = postprocess::example_set_from_json(f);
    }
    return out;
}

std::string save_records(std::span<const generation_record> records) {
    std::string out;
    for (const auto& r : records) {
        out += to_json(r).dump();
        out += '\n';
    }
    return out;
}

std::vector<generation_record> load_records(std::string_view text) {
    std::vector<generation_record> out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        ++line_no;
        auto line = text::trim(text.substr(start, end - start));
        start = end + 1;
        if (line.empty()) {
            continue;
        }
        try {
            out.push_back(record_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw error("records line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace icicl::eval
