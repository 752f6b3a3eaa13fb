#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "tfs/error.hpp"
#include "tfs/flow_data.hpp"

namespace tfs {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell.push_back('"');
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cell.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (ch != '\r') {
            cell.push_back(ch);
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

std::string trim(std::string_view s) {
    auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    auto last = s.find_last_not_of(" \t");
    return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

enum class CellStatus { ok, missing, garbage };

CellStatus parse_number(const std::string& raw, double& out) {
    const std::string s = trim(raw);
    const std::string l = lower(s);
    if (s.empty() || l == "nan" || l == "inf" || l == "-inf" || l == "infinity" || l == "-infinity") {
        out = std::numeric_limits<double>::quiet_NaN();
        return CellStatus::missing;
    }
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (*begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end) return CellStatus::garbage;
    if (!std::isfinite(out)) {
        out = std::numeric_limits<double>::quiet_NaN();
        return CellStatus::missing;
    }
    return CellStatus::ok;
}

std::optional<int> parse_protocol(const std::string& raw) {
    const std::string l = lower(trim(raw));
    if (l == "tcp") return kProtocolTcp;
    if (l == "udp") return 17;
    if (l == "icmp") return 1;
    int value = 0;
    auto [ptr, ec] = std::from_chars(l.data(), l.data() + l.size(), value);
    if (ec != std::errc() || ptr != l.data() + l.size()) return std::nullopt;
    return value;
}

constexpr std::array<std::string_view, 3> kDerivedKeys = {"bytespersec", "pktspersec", "ratiooutin"};

}  // namespace

ColumnSchema ColumnSchema::defaults() {
    ColumnSchema s;
    for (Feature f : kAllFeatures) s.columns[canonical_name(feature_name(f))] = {std::string(feature_name(f))};
    s.columns["label"] = {"Label"};
    s.columns["protocol"] = {"Protocol"};
    return s;
}

CsvLoadResult load_csv(const std::filesystem::path& path, const ColumnSchema& schema) {
    std::ifstream in(path);
    if (!in) throw input_error("load_csv: cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw input_error("load_csv: '" + path.string() + "' has no header row");
    const std::vector<std::string> header = split_csv_line(line);

    std::map<std::string, std::vector<std::string>> mapping;
    for (const auto& [key, cols] : schema.columns) mapping[canonical_name(key)] = cols;

    auto resolve = [&](const std::string& key, bool required) -> std::vector<std::size_t> {
        auto it = mapping.find(key);
        if (it == mapping.end() || it->second.empty()) {
            if (required) throw input_error("load_csv: schema does not map mandatory field '" + key + "'");
            return {};
        }
        std::vector<std::size_t> idx;
        for (const std::string& col : it->second) {
            auto pos = std::find_if(header.begin(), header.end(),
                                    [&](const std::string& h) { return trim(h) == trim(col); });
            if (pos == header.end()) {
                if (required) throw input_error("load_csv: missing mandatory column '" + col + "'");
                return {};
            }
            idx.push_back(static_cast<std::size_t>(pos - header.begin()));
        }
        return idx;
    };

    std::array<std::vector<std::size_t>, kBaseFeatureCount> base_cols;
    for (Feature f : kBaseFeatures) base_cols[index_of(f)] = resolve(canonical_name(feature_name(f)), true);
    std::array<std::vector<std::size_t>, 3> derived_cols;
    for (std::size_t k = 0; k < kDerivedKeys.size(); ++k) derived_cols[k] = resolve(std::string(kDerivedKeys[k]), false);
    const auto label_col = resolve("label", true);
    if (label_col.size() != 1) throw input_error("load_csv: the label field must map to exactly one column");
    const auto protocol_col = resolve("protocol", false);

    std::map<std::string, Label> label_map;
    for (const auto& [k, v] : schema.label_map) label_map[lower(trim(k))] = v;

    CsvLoadResult result;
    while (std::getline(in, line)) {
        if (trim(line).empty() || line == "\r") continue;
        const std::vector<std::string> cells = split_csv_line(line);
        auto cell = [&](std::size_t i) -> const std::string* { return i < cells.size() ? &cells[i] : nullptr; };

        bool garbage = false;
        auto sum_columns = [&](const std::vector<std::size_t>& cols) {
            double total = 0.0;
            for (std::size_t c : cols) {
                const std::string* s = cell(c);
                double v = 0.0;
                const CellStatus st = s ? parse_number(*s, v) : CellStatus::missing;
                if (st == CellStatus::garbage) garbage = true;
                total += v;
            }
            return total;
        };

        FlowRecord r;
        for (Feature f : kBaseFeatures) r[f] = sum_columns(base_cols[index_of(f)]);
        r[Feature::duration] *= schema.duration_scale;
        derive_features(r);
        for (std::size_t k = 0; k < derived_cols.size(); ++k) {
            if (!derived_cols[k].empty()) r.values[kBaseFeatureCount + k] = sum_columns(derived_cols[k]);
        }

        const std::string* label_cell = cell(label_col.front());
        const std::string label = label_cell ? lower(trim(*label_cell)) : std::string{};
        if (label.empty()) garbage = true;
        if (auto it = label_map.find(label); it != label_map.end()) {
            r.label = it->second;
        } else {
            r.label = label == "benign" ? Label::benign : Label::malicious;
        }

        if (!protocol_col.empty()) {
            const std::string* p = cell(protocol_col.front());
            auto proto = p ? parse_protocol(*p) : std::nullopt;
            if (!proto) garbage = true;
            r.protocol = proto;
        }

        if (garbage) {
            ++result.skipped_rows;
            continue;
        }
        result.dataset.rows.push_back(r);
    }
    if (result.dataset.empty()) throw input_error("load_csv: zero parseable rows in '" + path.string() + "'");
    return result;
}

}  // namespace tfs
