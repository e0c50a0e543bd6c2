#include "sg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sg {

namespace {

template <class Enum>
std::vector<FrequencyRow> frequency_table(const std::map<Enum, long>& counts) {
  long total = 0;
  for (const auto& [k, n] : counts) total += n;
  std::vector<FrequencyRow> rows;
  for (const auto& [k, n] : counts)
    rows.push_back({std::string(to_string(k)), n, total ? 100.0 * static_cast<double>(n) / total : 0.0});
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.count > b.count; });
  return rows;
}

std::vector<ValueRow> value_table(const std::map<std::int64_t, long>& counts, double unit, bool isLength) {
  long total = 0;
  for (const auto& [k, n] : counts) total += n;
  std::vector<ValueRow> rows;
  rows.reserve(counts.size());
  for (const auto& [k, n] : counts) {
    ValueRow r;
    r.value = static_cast<double>(k) * unit;
    r.count = n;
    r.percent = 100.0 * static_cast<double>(n) / static_cast<double>(total);
    rows.push_back(r);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.count > b.count; });
  long running = 0;
  for (auto& r : rows) {
    running += r.count;
    r.cumulative = static_cast<double>(running) / static_cast<double>(total);
    if (isLength) {
      r.label = format_length_fewest_digits(r.value);
    } else {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g deg", r.value);
      r.label = buf;
    }
  }
  return rows;
}

int nearest_rank(const std::map<int, long>& counts, long total, int pct) {
  const long target = std::max<long>(1, static_cast<long>(std::ceil(pct / 100.0 * static_cast<double>(total))));
  long running = 0;
  for (const auto& [v, n] : counts) {
    running += n;
    if (running >= target) return v;
  }
  return counts.empty() ? 0 : counts.rbegin()->first;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

void StatsAccumulator::add(const Sketch& s) {
  ++sketches_;
  for (const auto& p : s.primitives) ++primitiveTypes_[p.type()];
  for (const auto& c : s.constraints) {
    ++constraintTypes_[c.type];
    if (c.length) ++lengths_[std::llround(c.length->meters() * 1e9)];
    if (c.angle) ++angles_[std::llround(*c.angle * 1e6)];
  }
  ++sizes_[static_cast<int>(s.primitives.size())][static_cast<int>(s.constraints.size())];
}

void StatsAccumulator::merge(const StatsAccumulator& other) {
  sketches_ += other.sketches_;
  for (const auto& [k, n] : other.primitiveTypes_) primitiveTypes_[k] += n;
  for (const auto& [k, n] : other.constraintTypes_) constraintTypes_[k] += n;
  for (const auto& [p, inner] : other.sizes_)
    for (const auto& [c, n] : inner) sizes_[p][c] += n;
  for (const auto& [k, n] : other.lengths_) lengths_[k] += n;
  for (const auto& [k, n] : other.angles_) angles_[k] += n;
}

StatsReport StatsAccumulator::report() const {
  StatsReport r;
  r.sketches = sketches_;
  for (const auto& [k, n] : primitiveTypes_) r.primitives += n;
  for (const auto& [k, n] : constraintTypes_) r.constraints += n;
  r.primitiveTypes = frequency_table(primitiveTypes_);
  r.constraintTypes = frequency_table(constraintTypes_);
  for (const auto& [p, inner] : sizes_) {
    PercentileRow row;
    row.primitives = p;
    for (const auto& [c, n] : inner) {
      r.primitiveCountHistogram[p] += n;
      r.constraintCountHistogram[c] += n;
      row.sketches += n;
    }
    for (std::size_t i = 0; i < kStatsPercentiles.size(); ++i)
      row.constraints[i] = nearest_rank(inner, row.sketches, kStatsPercentiles[i]);
    r.constraintsVsPrimitives.push_back(row);
  }
  r.lengths = value_table(lengths_, 1e-9, true);
  r.angles = value_table(angles_, 1e-6, false);
  return r;
}

std::string format_stats_text(const StatsReport& r, std::size_t topValues) {
  std::string out;
  out += "sketches " + std::to_string(r.sketches) + ", primitives " + std::to_string(r.primitives) +
         ", constraints " + std::to_string(r.constraints) + "\n";
  auto freq = [&](const char* title, const std::vector<FrequencyRow>& rows) {
    out += std::string("\n") + title + "\n";
    double sum = 0.0;
    for (const auto& row : rows) {
      out += "  " + row.key + std::string(row.key.size() < 14 ? 14 - row.key.size() : 1, ' ') + pct(row.percent) +
             "%  (" + std::to_string(row.count) + ")\n";
      sum += row.percent;
    }
    out += "  total         " + pct(sum) + "%\n";
  };
  freq("primitive types", r.primitiveTypes);
  freq("constraint types", r.constraintTypes);

  out += "\nconstraints per sketch by primitive count (p50 p69 p84 p93)\n";
  for (const auto& row : r.constraintsVsPrimitives) {
    out += "  " + std::to_string(row.primitives) + " primitives, " + std::to_string(row.sketches) + " sketches:";
    for (int c : row.constraints) out += " " + std::to_string(c);
    out += "\n";
  }
  auto values = [&](const char* title, const std::vector<ValueRow>& rows) {
    out += std::string("\n") + title + "\n";
    for (std::size_t i = 0; i < rows.size() && i < topValues; ++i)
      out += "  " + rows[i].label + "  " + pct(rows[i].percent) + "%  cumulative " + pct(100.0 * rows[i].cumulative) +
             "%\n";
    if (rows.size() > topValues) out += "  ... " + std::to_string(rows.size() - topValues) + " more\n";
  };
  values("length values", r.lengths);
  values("angle values", r.angles);
  return out;
}

std::map<std::string, std::string> stats_csv_tables(const StatsReport& r) {
  std::map<std::string, std::string> t;
  auto freq = [](const std::vector<FrequencyRow>& rows) {
    std::string s = "type,count,percent\n";
    for (const auto& row : rows) s += csv_field(row.key) + "," + std::to_string(row.count) + "," + pct(row.percent) + "\n";
    return s;
  };
  t["primitive_types"] = freq(r.primitiveTypes);
  t["constraint_types"] = freq(r.constraintTypes);
  auto hist = [](const std::map<int, long>& h) {
    std::string s = "size,sketches\n";
    for (const auto& [k, n] : h) s += std::to_string(k) + "," + std::to_string(n) + "\n";
    return s;
  };
  t["primitive_count_histogram"] = hist(r.primitiveCountHistogram);
  t["constraint_count_histogram"] = hist(r.constraintCountHistogram);
  std::string pv = "primitives,sketches,p50,p69,p84,p93\n";
  for (const auto& row : r.constraintsVsPrimitives) {
    pv += std::to_string(row.primitives) + "," + std::to_string(row.sketches);
    for (int c : row.constraints) pv += "," + std::to_string(c);
    pv += "\n";
  }
  t["constraints_vs_primitives"] = pv;
  auto values = [](const std::vector<ValueRow>& rows, const char* unit) {
    std::string s = std::string("rank,value_") + unit + ",label,count,percent,cumulative\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.9g", rows[i].value);
      char cum[32];
      std::snprintf(cum, sizeof cum, "%.6f", rows[i].cumulative);
      s += std::to_string(i + 1) + "," + buf + "," + csv_field(rows[i].label) + "," + std::to_string(rows[i].count) +
           "," + pct(rows[i].percent) + "," + cum + "\n";
    }
    return s;
  };
  t["length_values"] = values(r.lengths, "m");
  t["angle_values"] = values(r.angles, "deg");
  return t;
}

}  // namespace sg
