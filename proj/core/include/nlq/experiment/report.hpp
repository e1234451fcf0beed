#ifndef NLQ_EXPERIMENT_REPORT_HPP
#define NLQ_EXPERIMENT_REPORT_HPP

#include <string>
#include <vector>

namespace nlq::experiment {

struct Check {
    std::string name;
    bool pass = false;
    double value = 0.0;
    std::string detail;
};

/// One CSV artifact: header row plus full-precision (17 significant digits)
/// records.
struct CsvFile {
    std::string name;
    std::string contents;
};

class CsvBuilder {
public:
    explicit CsvBuilder(const std::vector<std::string>& header);
    void row(const std::vector<double>& values);
    std::string str() const { return out_; }

private:
    std::string out_;
    std::size_t columns_;
};

struct ReportBundle {
    std::string experiment;
    std::vector<Check> checks;
    std::string summary_json;  // resolved config + checks + fitted coefficients
    std::vector<CsvFile> csv_files;
    std::string text_summary;
    bool runtime_instability = false;

    bool all_pass() const;
    int exit_code() const;  // 0 pass, 1 invariant fail, 3 runtime instability
};

/// Writes summary.json, report.txt and the CSV files into out_dir atomically
/// (temp file then rename).
void write_bundle(const ReportBundle& bundle, const std::string& out_dir);

std::string format_full(double v);  // %.17g

}  // namespace nlq::experiment

#endif
