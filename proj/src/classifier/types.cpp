#include "sts/classifier/types.hpp"

#include <sstream>

#include "sts/csv.hpp"

namespace sts::clf {

void NetworkConfig::validate() const {
    std::ostringstream why;
    if (classes != 3) throw ConfigError("network config: exactly 3 classes are supported");
    if (stack_filters.empty()) throw ConfigError("network config: at least one Inception stack required");
    for (int f : stack_filters) {
        if (f < 4 || f % 4 != 0) {
            throw ConfigError("network config: stack filter count " + std::to_string(f) +
                              " must be a positive multiple of 4 (four equal branches)");
        }
    }
    if (lstm_units < 1) throw ConfigError("network config: lstm_units must be >= 1");

    int t = input_t, h = input_h, w = input_w;
    why << "input " << t << "x" << h << "x" << w;
    for (std::size_t i = 0; i < stack_filters.size(); ++i) {
        if (i < 2) {
            if (t < 2) {
                throw ConfigError("network config: temporal extent collapses before temporal pool " +
                                  std::to_string(i + 1) + " (" + why.str() + ")");
            }
            t = (t - 2) / 2 + 1;
            why << " -tpool-> t=" << t;
        }
        if (h < 2 || w < 2) {
            throw ConfigError("network config: spatial extent collapses at stack " + std::to_string(i + 1) +
                              " (" + why.str() + ")");
        }
        h = (h - 2) / 2 + 1;
        w = (w - 2) / 2 + 1;
        why << " -spool-> " << h << "x" << w;
    }
    if (h < 4 || h % 2 != 0 || w < 4 || w % 2 != 0) {
        throw ConfigError("network config: adaptive pool to 2x2 needs an even spatial extent >= 4, have " +
                          std::to_string(h) + "x" + std::to_string(w) + " (" + why.str() + ")");
    }
    const int final_feat = stack_filters.back() * 2 * 2;
    if (t != pseudo_time_steps || final_feat != feature_dim) {
        throw ConfigError("network config: dims cannot reach " + std::to_string(pseudo_time_steps) + "x" +
                          std::to_string(feature_dim) + ": schedule yields " + std::to_string(t) + "x" +
                          std::to_string(final_feat) + " (" + why.str() + ", channels " +
                          std::to_string(stack_filters.back()) + " * 2*2)");
    }
}

std::vector<LabelRow> load_labels(const std::string& path) {
    const CsvFile csv = read_csv(path, "clip_id,t_start,t_end,label");
    std::vector<LabelRow> out;
    out.reserve(csv.rows.size());
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        const std::string ctx = path + ":" + std::to_string(csv.line_numbers[r]);
        if (row.size() != 4) throw FormatError(ctx + ": expected 4 fields");
        LabelRow l;
        l.clip_id = row[0];
        l.t_start = parse_double(row[1], ctx);
        l.t_end = parse_double(row[2], ctx);
        l.label = class_from_name(row[3]);
        out.push_back(std::move(l));
    }
    return out;
}

std::string labels_to_csv(const std::vector<LabelRow>& rows) {
    std::ostringstream out;
    out << "clip_id,t_start,t_end,label\n";
    for (const auto& r : rows) {
        out << r.clip_id << ',' << format_double(r.t_start) << ',' << format_double(r.t_end) << ','
            << class_name(r.label) << '\n';
    }
    return out.str();
}

std::string classifications_to_csv(const std::vector<ClipClassification>& rows) {
    std::ostringstream out;
    out << "clip_id,predicted,p_sit_to_stand,p_stand_to_sit,p_other\n";
    for (const auto& r : rows) {
        out << r.clip_id << ',' << class_name(r.predicted) << ',' << format_double(r.probabilities[0]) << ','
            << format_double(r.probabilities[1]) << ',' << format_double(r.probabilities[2]) << '\n';
    }
    return out.str();
}

std::vector<ClipClassification> classifications_from_csv(const std::string& path) {
    const CsvFile csv = read_csv(path, "clip_id,predicted,p_sit_to_stand,p_stand_to_sit,p_other");
    std::vector<ClipClassification> out;
    out.reserve(csv.rows.size());
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        const std::string ctx = path + ":" + std::to_string(csv.line_numbers[r]);
        if (row.size() != 5) throw FormatError(ctx + ": expected 5 fields");
        ClipClassification c;
        c.clip_id = row[0];
        c.predicted = class_from_name(row[1]);
        for (int k = 0; k < 3; ++k) c.probabilities[k] = parse_double(row[2 + k], ctx);
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace sts::clf
