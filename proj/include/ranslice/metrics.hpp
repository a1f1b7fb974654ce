#pragma once

// Per-slot metrics rows, their CSV form and running-mean summaries.
//
// metrics.csv columns, in order:
//   slot
//   for each MU n: mu{n}_queue, mu{n}_drops, mu{n}_cpu_j, mu{n}_tx_j,
//                  mu{n}_utility, mu{n}_loss (empty when no training step ran)
//   for each SP i: sp{i}_state, sp{i}_value, sp{i}_payment, sp{i}_won,
//                  sp{i}_U0 .. sp{i}_U{S-1}
// Reals are written in shortest round-trip form, so parsing a file gives
// back the in-memory rows bit for bit.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ranslice/error.hpp"

namespace ranslice {

struct MuMetrics {
  int queue = 0;
  int drops = 0;
  double cpu_j = 0.0;
  double tx_j = 0.0;
  double utility = 0.0;
  std::optional<double> loss;

  friend bool operator==(const MuMetrics&, const MuMetrics&) = default;
};

struct SpMetrics {
  int state = 0;
  double value = 0.0;
  double payment = 0.0;
  bool won = false;
  std::vector<double> payment_values;

  friend bool operator==(const SpMetrics&, const SpMetrics&) = default;
};

struct MetricsRow {
  long slot = 0;
  std::vector<MuMetrics> mus;
  std::vector<SpMetrics> sps;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct MetricsShape {
  int num_mus = 0;
  int num_sps = 0;
  int payment_states = 0;
};

inline std::vector<std::string> metrics_header(const MetricsShape& shape) {
  std::vector<std::string> h{"slot"};
  for (int n = 0; n < shape.num_mus; ++n)
    for (const char* f : {"queue", "drops", "cpu_j", "tx_j", "utility", "loss"})
      h.push_back("mu" + std::to_string(n) + "_" + f);
  for (int i = 0; i < shape.num_sps; ++i) {
    for (const char* f : {"state", "value", "payment", "won"}) h.push_back("sp" + std::to_string(i) + "_" + f);
    for (int s = 0; s < shape.payment_states; ++s) h.push_back("sp" + std::to_string(i) + "_U" + std::to_string(s));
  }
  return h;
}

namespace detail {

inline void append_real(std::string& out, double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

inline double parse_real(std::string_view s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw std::runtime_error("bad number '" + std::string(s) + "' in metrics file");
  return v;
}

inline long parse_int(std::string_view s) {
  long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw std::runtime_error("bad integer '" + std::string(s) + "' in metrics file");
  return v;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

inline std::string format_row(const MetricsRow& row) {
  std::string s = std::to_string(row.slot);
  for (const auto& m : row.mus) {
    s += ',' + std::to_string(m.queue) + ',' + std::to_string(m.drops) + ',';
    detail::append_real(s, m.cpu_j);
    s += ',';
    detail::append_real(s, m.tx_j);
    s += ',';
    detail::append_real(s, m.utility);
    s += ',';
    if (m.loss) detail::append_real(s, *m.loss);
  }
  for (const auto& p : row.sps) {
    s += ',' + std::to_string(p.state) + ',';
    detail::append_real(s, p.value);
    s += ',';
    detail::append_real(s, p.payment);
    s += p.won ? ",1" : ",0";
    for (double u : p.payment_values) {
      s += ',';
      detail::append_real(s, u);
    }
  }
  return s;
}

inline MetricsRow parse_row(std::string_view line, const MetricsShape& shape) {
  const auto f = detail::split(line);
  const std::size_t want = 1 + 6 * static_cast<std::size_t>(shape.num_mus) +
                           (4 + static_cast<std::size_t>(shape.payment_states)) * static_cast<std::size_t>(shape.num_sps);
  if (f.size() != want) throw std::runtime_error("metrics row has " + std::to_string(f.size()) + " fields, expected " +
                                                 std::to_string(want));
  MetricsRow row;
  std::size_t k = 0;
  row.slot = detail::parse_int(f[k++]);
  for (int n = 0; n < shape.num_mus; ++n) {
    MuMetrics m;
    m.queue = static_cast<int>(detail::parse_int(f[k++]));
    m.drops = static_cast<int>(detail::parse_int(f[k++]));
    m.cpu_j = detail::parse_real(f[k++]);
    m.tx_j = detail::parse_real(f[k++]);
    m.utility = detail::parse_real(f[k++]);
    if (!f[k].empty()) m.loss = detail::parse_real(f[k]);
    ++k;
    row.mus.push_back(m);
  }
  for (int i = 0; i < shape.num_sps; ++i) {
    SpMetrics p;
    p.state = static_cast<int>(detail::parse_int(f[k++]));
    p.value = detail::parse_real(f[k++]);
    p.payment = detail::parse_real(f[k++]);
    p.won = detail::parse_int(f[k++]) != 0;
    for (int s = 0; s < shape.payment_states; ++s) p.payment_values.push_back(detail::parse_real(f[k++]));
    row.sps.push_back(std::move(p));
  }
  return row;
}

/// Infers the shape from a header line written by metrics_header().
inline MetricsShape shape_from_header(std::string_view header) {
  MetricsShape s;
  const auto cols = detail::split(header);
  for (auto c : cols) {
    if (c.ends_with("_queue")) ++s.num_mus;
    if (c.ends_with("_state")) ++s.num_sps;
    if (c.starts_with("sp0_U")) ++s.payment_states;
  }
  if (cols.empty() || cols[0] != "slot") throw std::runtime_error("metrics header must start with 'slot'");
  return s;
}

/// Buffered CSV writer. Flushes every `flush_every` rows and on close.
class MetricsWriter {
 public:
  MetricsWriter(const std::string& path, const MetricsShape& shape, long flush_every = 1000)
      : path_(path), out_(path, std::ios::trunc), flush_every_(flush_every) {
    if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
    const auto h = metrics_header(shape);
    for (std::size_t i = 0; i < h.size(); ++i) out_ << (i ? "," : "") << h[i];
    out_ << '\n';
    check();
  }
  MetricsWriter(const MetricsWriter&) = delete;
  MetricsWriter& operator=(const MetricsWriter&) = delete;
  ~MetricsWriter() {
    if (out_.is_open()) out_.flush();
  }

  void write(const MetricsRow& row) {
    out_ << format_row(row) << '\n';
    if (++rows_ % flush_every_ == 0) {
      out_.flush();
      check();
    }
  }

  void close() {
    out_.flush();
    check();
    out_.close();
  }

 private:
  void check() {
    if (!out_) throw std::runtime_error("write failed on " + path_);
  }

  std::string path_;
  std::ofstream out_;
  long flush_every_;
  long rows_ = 0;
};

struct MetricsFile {
  MetricsShape shape;
  std::vector<std::string> header;
  std::vector<MetricsRow> rows;
};

inline MetricsFile read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  MetricsFile f;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + " is empty");
  f.shape = shape_from_header(line);
  for (auto c : detail::split(line)) f.header.emplace_back(c);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    f.rows.push_back(parse_row(line, f.shape));
  }
  return f;
}

/// Per-MU averages over the slots seen so far, then averaged across MUs.
struct RunSummary {
  long slots = 0;
  double queue = 0.0;
  double drops = 0.0;
  double cpu_j = 0.0;
  double tx_j = 0.0;
  double utility = 0.0;
};

class SummaryAccumulator {
 public:
  SummaryAccumulator() = default;
  explicit SummaryAccumulator(int num_mus) : sums_(static_cast<std::size_t>(num_mus) * 5, 0.0) {}

  void add(const MetricsRow& row) {
    require(row.mus.size() * 5 == sums_.size(), "summary: MU count mismatch");
    for (std::size_t n = 0; n < row.mus.size(); ++n) {
      const auto& m = row.mus[n];
      double* s = &sums_[n * 5];
      s[0] += m.queue;
      s[1] += m.drops;
      s[2] += m.cpu_j;
      s[3] += m.tx_j;
      s[4] += m.utility;
    }
    ++slots_;
  }

  RunSummary summary() const {
    RunSummary r;
    r.slots = slots_;
    const std::size_t mus = sums_.size() / 5;
    if (slots_ == 0 || mus == 0) return r;
    double acc[5] = {0, 0, 0, 0, 0};
    for (std::size_t n = 0; n < mus; ++n)
      for (int k = 0; k < 5; ++k) acc[k] += sums_[n * 5 + static_cast<std::size_t>(k)] / static_cast<double>(slots_);
    const double m = static_cast<double>(mus);
    r.queue = acc[0] / m;
    r.drops = acc[1] / m;
    r.cpu_j = acc[2] / m;
    r.tx_j = acc[3] / m;
    r.utility = acc[4] / m;
    return r;
  }

  std::vector<double>& raw() { return sums_; }
  const std::vector<double>& raw() const { return sums_; }
  long slots() const { return slots_; }
  void set_slots(long s) { slots_ = s; }

 private:
  std::vector<double> sums_;
  long slots_ = 0;
};

}  // namespace ranslice
