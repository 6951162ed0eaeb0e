#include "faultae/evaluation.hpp"

#include <cstdio>
#include <sstream>

#include "faultae/csv.hpp"

namespace faultae {

ConfusionMatrix confusion(const LabelVector& flags, const LabelVector& truth) {
  if (flags.size() != truth.size()) {
    throw ValidationError("flag count (" + std::to_string(flags.size()) + ") does not match label count (" +
                          std::to_string(truth.size()) + ")");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (truth[i]) {
      (flags[i] ? cm.tp : cm.fn) += 1;
    } else {
      (flags[i] ? cm.fp : cm.tn) += 1;
    }
  }
  return cm;
}

namespace {
Metric ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string metric_text(const Metric& m) {
  if (!m) return "undefined";
  return csv::format_double(*m);
}
}  // namespace

Metric f1_score(double precision, double recall) {
  if (precision + recall <= 0.0) return std::nullopt;
  return 2.0 * precision * recall / (precision + recall);
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.counts = cm;
  r.precision = ratio(cm.tp, cm.tp + cm.fp);
  r.recall = ratio(cm.tp, cm.tp + cm.fn);
  r.specificity = ratio(cm.tn, cm.tn + cm.fp);
  if (r.precision && r.recall) r.f1 = f1_score(*r.precision, *r.recall);
  return r;
}

std::string format_metrics_table(const MetricsReport& report, const std::string& title) {
  std::ostringstream os;
  if (!title.empty()) os << title << '\n';
  auto row = [&](const char* name, const Metric& m) {
    char buf[64];
    if (m) {
      std::snprintf(buf, sizeof buf, "  %-12s %8.4f\n", name, *m);
    } else {
      std::snprintf(buf, sizeof buf, "  %-12s %8s\n", name, "n/a");
    }
    os << buf;
  };
  row("precision", report.precision);
  row("recall", report.recall);
  row("specificity", report.specificity);
  row("f1", report.f1);
  const auto& c = report.counts;
  os << "  tp=" << c.tp << " fp=" << c.fp << " tn=" << c.tn << " fn=" << c.fn << '\n';
  return os.str();
}

void write_metrics_csv(const std::filesystem::path& path, const MetricsReport& report) {
  auto out = csv::open_output(path);
  out << "metric,value\n";
  out << "precision," << metric_text(report.precision) << '\n';
  out << "recall," << metric_text(report.recall) << '\n';
  out << "specificity," << metric_text(report.specificity) << '\n';
  out << "f1," << metric_text(report.f1) << '\n';
  out << "tp," << report.counts.tp << '\n';
  out << "fp," << report.counts.fp << '\n';
  out << "tn," << report.counts.tn << '\n';
  out << "fn," << report.counts.fn << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace faultae
