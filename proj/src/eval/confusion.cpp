#include "sts/eval/confusion.hpp"

#include <sstream>

#include "sts/csv.hpp"
#include "sts/errors.hpp"

namespace sts::eval {

AccuracyReport accuracy_from_matrix(const ConfusionMatrix3& m) {
    AccuracyReport report;
    report.matrix = m;
    double sum = 0.0;
    int defined = 0;
    for (int c = 0; c < 3; ++c) {
        const long long row = m.row_sum(c);
        if (row == 0) {
            report.recall[c] = std::nullopt;
            report.warnings.push_back("class " + clf::class_name(static_cast<clf::StSClass>(c)) +
                                      " absent from ground truth; excluded from the overall mean");
            continue;
        }
        report.recall[c] = static_cast<double>(m.counts[c][c]) / static_cast<double>(row);
        sum += *report.recall[c];
        ++defined;
    }
    report.overall = defined > 0 ? sum / defined : 0.0;
    const long long other_row = m.row_sum(static_cast<int>(clf::StSClass::Other));
    if (other_row > 0) {
        const long long fp = m.counts[2][0] + m.counts[2][1];
        report.sts_false_positive_rate = static_cast<double>(fp) / static_cast<double>(other_row);
    }
    return report;
}

AccuracyReport confusion_and_accuracy(const std::vector<clf::StSClass>& truth,
                                      const std::vector<clf::StSClass>& predicted) {
    if (truth.size() != predicted.size()) {
        throw ShapeError("confusion_and_accuracy: " + std::to_string(truth.size()) + " truth labels vs " +
                         std::to_string(predicted.size()) + " predictions");
    }
    ConfusionMatrix3 m;
    for (std::size_t i = 0; i < truth.size(); ++i) m.add(truth[i], predicted[i]);
    return accuracy_from_matrix(m);
}

std::string confusion_to_csv(const ConfusionMatrix3& m) {
    std::ostringstream out;
    for (int r = 0; r < 3; ++r) {
        out << m.counts[r][0] << ',' << m.counts[r][1] << ',' << m.counts[r][2] << '\n';
    }
    return out.str();
}

ConfusionMatrix3 confusion_from_csv(const std::string& path) {
    const std::string content = read_text_file(path);
    std::istringstream in(content);
    ConfusionMatrix3 m;
    std::string line;
    for (int r = 0; r < 3; ++r) {
        if (!std::getline(in, line)) throw FormatError(path + ": expected 3 rows");
        const auto fields = split_csv_line(line);
        if (fields.size() != 3) throw FormatError(path + ": expected 3 columns in row " + std::to_string(r));
        for (int c = 0; c < 3; ++c) {
            m.counts[r][c] = parse_int(fields[c], path);
        }
    }
    return m;
}

}  // namespace sts::eval
