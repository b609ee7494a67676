#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fcdram/error.hpp"
#include "fcdram/harness.hpp"

namespace fcdram {

namespace {

double median_of(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  const std::size_t n = end - begin;
  if (n == 0) return 0.0;
  const std::size_t mid = begin + n / 2;
  return n % 2 == 1 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool pattern_matches(const std::string& filter, const std::string& pattern) {
  if (filter.empty() || filter == pattern) return true;
  if (filter.find('/') != std::string::npos) return false;
  return pattern.compare(0, filter.size(), filter) == 0 && pattern.size() > filter.size() &&
         pattern[filter.size()] == '/';
}

}  // namespace

GroupSummary summarize(std::vector<double> rates) {
  GroupSummary g;
  g.cells = rates.size();
  if (rates.empty()) return g;
  std::sort(rates.begin(), rates.end());
  const std::size_t n = rates.size();
  g.mean = std::accumulate(rates.begin(), rates.end(), 0.0) / static_cast<double>(n);
  g.min = rates.front();
  g.max = rates.back();
  g.median = median_of(rates, 0, n);
  if (n == 1) {
    g.q1 = g.q3 = rates.front();
  } else {
    g.q1 = median_of(rates, 0, n / 2);
    g.q3 = median_of(rates, (n + 1) / 2, n);
  }
  return g;
}

std::vector<GroupSummary> SuccessRateReport::groups() const {
  std::vector<GroupSummary> out;
  std::size_t i = 0;
  while (i < cells.size()) {
    std::size_t j = i;
    std::vector<double> rates;
    while (j < cells.size() && cells[j].kind == cells[i].kind && cells[j].n == cells[i].n &&
           cells[j].temperature == cells[i].temperature && cells[j].pattern == cells[i].pattern) {
      rates.push_back(cells[j].rate());
      ++j;
    }
    GroupSummary g = summarize(std::move(rates));
    g.kind = cells[i].kind;
    g.n = cells[i].n;
    g.temperature = cells[i].temperature;
    g.pattern = cells[i].pattern;
    out.push_back(std::move(g));
    i = j;
  }
  return out;
}

GroupSummary SuccessRateReport::select(const std::string& kind, std::uint32_t n, const std::string& pattern,
                                       double temperature) const {
  std::vector<double> rates;
  for (const CellRecord& c : cells) {
    if (!kind.empty() && c.kind != kind) continue;
    if (n != 0 && c.n != n) continue;
    if (temperature >= 0.0 && c.temperature != temperature) continue;
    if (!pattern_matches(pattern, c.pattern)) continue;
    rates.push_back(c.rate());
  }
  GroupSummary g = summarize(std::move(rates));
  g.kind = kind;
  g.n = n;
  g.pattern = pattern;
  g.temperature = temperature;
  return g;
}

std::string to_csv(const Report& report) {
  std::ostringstream os;
  if (const auto* s = std::get_if<SuccessRateReport>(&report)) {
    os << "kind,n,temperature,pattern,region_f,region_l,cell_id,success_rate\n";
    for (const CellRecord& c : s->cells) {
      os << c.kind << ',' << c.n << ',' << shortest(c.temperature) << ',' << c.pattern << ',' << to_string(c.region_f)
         << ',' << to_string(c.region_l) << ',' << c.cell_id << ',' << fixed6(c.rate()) << '\n';
    }
  } else if (const auto* c = std::get_if<CoverageReport>(&report)) {
    os << "pattern,fraction\n";
    for (const auto& [label, fraction] : c->fractions) os << label << ',' << fixed6(fraction) << '\n';
  } else {
    const auto& r = std::get<RevengReport>(report);
    os << "row," << r.value_column << '\n';
    for (const auto& [row, value] : r.rows) os << row << ',' << value << '\n';
  }
  return os.str();
}

void write_csv(const Report& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  const std::string text = to_csv(report);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

}  // namespace fcdram
