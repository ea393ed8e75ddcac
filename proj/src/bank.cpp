#include "icicl/bank.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "icicl/error.hpp"
#include "icicl/extract.hpp"
#include "icicl/log.hpp"
#include "icicl/text.hpp"

namespace icicl {

namespace {

bool is_spec_extension(const std::filesystem::path& p) {
    auto ext = text::ascii_lower(p.extension().string());
    return ext == ".json" || ext == ".yaml" || ext == ".yml";
}

bool matches(std::string_view filter, const std::string& name, const std::string& rel) {
    if (filter.empty()) {
        return true;
    }
    std::string f(filter);
    return fnmatch(f.c_str(), name.c_str(), 0) == 0 || fnmatch(f.c_str(), rel.c_str(), 0) == 0;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw error("cannot open " + p.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

auto identity(const bank_entry& e) {
    const auto& p = e.parameter;
    return std::tie(p.api_name, p.source_pointer, p.operation_id, p.param_name);
}

}  // namespace

bank_entry make_entry(api_parameter p) {
    if (p.existing_examples.empty()) {
        throw std::invalid_argument("bank entry needs at least one example");
    }
    auto canonical = p.existing_examples.front();
    return bank_entry{std::move(p), std::move(canonical)};
}

void normalize_bank(parameter_bank& bank) {
    std::stable_sort(bank.entries.begin(), bank.entries.end(),
                     [](const bank_entry& a, const bank_entry& b) { return identity(a) < identity(b); });
    auto last = std::unique(bank.entries.begin(), bank.entries.end(), [](const bank_entry& a, const bank_entry& b) {
        if (identity(a) == identity(b)) {
            log::warn("dropping duplicate bank entry " + b.parameter.api_name + " " + b.parameter.source_pointer);
            return true;
        }
        return false;
    });
    bank.entries.erase(last, bank.entries.end());
}

mining_report mine_corpus(const std::filesystem::path& corpus_dir, std::string_view include_filter) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(corpus_dir)) {
        throw error("corpus directory does not exist: " + corpus_dir.string());
    }
    std::vector<std::pair<std::string, fs::path>> files;
    for (const auto& entry : fs::recursive_directory_iterator(corpus_dir)) {
        if (!entry.is_regular_file() || !is_spec_extension(entry.path())) {
            continue;
        }
        auto rel = fs::relative(entry.path(), corpus_dir).generic_string();
        if (matches(include_filter, entry.path().filename().string(), rel)) {
            files.emplace_back(rel, entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    mining_report report;
    std::string digest_input;
    for (const auto& [rel, path] : files) {
        auto bytes = read_file(path);
        digest_input += rel;
        digest_input.push_back('\0');
        digest_input += std::to_string(bytes.size());
        digest_input.push_back('\0');
        digest_input += bytes;

        std::vector<api_parameter> params;
        try {
            auto ext = text::ascii_lower(path.extension().string());
            auto doc = parse_document(bytes, ext == ".json" ? format_hint::json : format_hint::yaml);
            auto rel_path = fs::path(rel);
            doc.name = (rel_path.parent_path() / rel_path.stem()).generic_string();
            params = extract_parameters(doc);
        } catch (const error& e) {
            log::warn("skipping " + rel + ": " + e.what());
            ++report.skipped_files;
            continue;
        }
        ++report.spec_files;
        report.parameter_count += params.size();
        for (auto& p : params) {
            if (!p.existing_examples.empty()) {
                report.bank.entries.push_back(make_entry(std::move(p)));
            }
        }
    }
    if (report.spec_files == 0) {
        throw empty_corpus("no parseable specification found in " + corpus_dir.string());
    }
    report.bank.source_digest = text::sha256_hex(digest_input);
    normalize_bank(report.bank);
    if (report.bank.entries.empty()) {
        log::warn("no parameter in the corpus carries an example; the bank is empty");
    }
    return report;
}

parameter_bank mine_bank(const std::filesystem::path& corpus_dir, std::string_view include_filter) {
    return mine_corpus(corpus_dir, include_filter).bank;
}

std::string save_bank(const parameter_bank& bank) {
    std::string out = json{{"source_digest", bank.source_digest}}.dump();
    out.push_back('\n');
    for (const auto& e : bank.entries) {
        out += json{{"parameter", to_json(e.parameter)}, {"canonical_example", to_json(e.canonical_example)}}.dump();
        out.push_back('\n');
    }
    return out;
}

parameter_bank load_bank(std::string_view bytes) {
    parameter_bank bank;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool saw_header = false;
    std::set<std::tuple<std::string, std::string, std::string, std::string>> seen;
    while (pos < bytes.size()) {
        auto nl = bytes.find('\n', pos);
        auto line = bytes.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? bytes.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        auto parsed = json::parse(line.begin(), line.end(), nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object()) {
            throw corrupt_bank(line_no, "not a JSON object");
        }
        if (!saw_header) {
            auto d = parsed.find("source_digest");
            if (d == parsed.end() || !d->is_string() || parsed.size() != 1) {
                throw corrupt_bank(line_no, "expected {\"source_digest\": ...} header");
            }
            bank.source_digest = d->get<std::string>();
            saw_header = true;
            continue;
        }
        try {
            if (parsed.size() != 2 || !parsed.contains("parameter") || !parsed.contains("canonical_example")) {
                throw error("entry must have exactly 'parameter' and 'canonical_example'");
            }
            bank_entry e{api_parameter_from_json(parsed.at("parameter")),
                         example_value_from_json(parsed.at("canonical_example"))};
            const auto& ex = e.parameter.existing_examples;
            if (ex.empty()) {
                throw error("entry has no examples");
            }
            if (std::find(ex.begin(), ex.end(), e.canonical_example) == ex.end()) {
                throw error("canonical_example is not among existing_examples");
            }
            auto key = std::make_tuple(e.parameter.api_name, e.parameter.operation_id, e.parameter.param_name,
                                       e.parameter.source_pointer);
            if (!seen.insert(key).second) {
                throw error("duplicate entry identity");
            }
            bank.entries.push_back(std::move(e));
        } catch (const corrupt_bank&) {
            throw;
        } catch (const error& err) {
            throw corrupt_bank(line_no, err.what());
        } catch (const std::exception& err) {
            throw corrupt_bank(line_no, err.what());
        }
    }
    if (!saw_header) {
        throw corrupt_bank(1, "missing header line");
    }
    return bank;
}

parameter_bank load_bank_file(const std::filesystem::path& path) { return load_bank(read_file(path)); }

}  // namespace icicl
