#include "nlq/experiment/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace nlq::experiment {

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvBuilder::CsvBuilder(const std::vector<std::string>& header)
    : columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ += ',';
        out_ += header[i];
    }
    out_ += '\n';
}

void CsvBuilder::row(const std::vector<double>& values) {
    if (values.size() != columns_) {
        throw std::logic_error("csv: row width does not match header");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out_ += ',';
        out_ += format_full(values[i]);
    }
    out_ += '\n';
}

bool ReportBundle::all_pass() const {
    for (const Check& c : checks) {
        if (!c.pass) return false;
    }
    return true;
}

int ReportBundle::exit_code() const {
    if (runtime_instability) return 3;
    return all_pass() ? 0 : 1;
}

namespace {

void atomic_write(const std::filesystem::path& dir, const std::string& name,
                  const std::string& contents) {
    const std::filesystem::path tmp = dir / (".tmp-" + name);
    const std::filesystem::path target = dir / name;
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
    }
    std::filesystem::rename(tmp, target);
}

}  // namespace

void write_bundle(const ReportBundle& bundle, const std::string& out_dir) {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    atomic_write(dir, "summary.json", bundle.summary_json);
    atomic_write(dir, "report.txt", bundle.text_summary);
    for (const CsvFile& f : bundle.csv_files) {
        atomic_write(dir, f.name, f.contents);
    }
}

}  // namespace nlq::experiment
