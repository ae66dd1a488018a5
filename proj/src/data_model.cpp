#include "crcal/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "crcal/errors.hpp"
#include "crcal/random.hpp"

namespace crcal {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

// Non-empty lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string_view>> lines_of(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    auto line = trim(text.substr(start, end - start));
    if (!line.empty()) out.emplace_back(number, line);
    start = end + 1;
  }
  return out;
}

[[noreturn]] void fail_row(std::size_t row, const std::string& what) {
  throw ValidationError("row " + std::to_string(row) + ": " + what);
}

double parse_real(std::string_view field, std::size_t row, std::string_view column) {
  double value = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value))
    fail_row(row, "non-numeric value '" + std::string(field) + "' in column " +
                      std::string(column));
  return value;
}

int parse_int(std::string_view field, std::size_t row, std::string_view column) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size())
    fail_row(row, "non-integer value '" + std::string(field) + "' in column " +
                      std::string(column));
  return value;
}

void require_header(std::span<const std::string_view> got,
                    std::initializer_list<std::string_view> want, std::string_view format) {
  bool ok = got.size() >= want.size();
  std::size_t c = 0;
  for (auto w : want) {
    if (!ok) break;
    ok = got[c++] == w;
  }
  if (!ok) {
    std::string expected;
    for (auto w : want) expected += (expected.empty() ? "" : ",") + std::string(w);
    throw ValidationError(std::string(format) + " header must start with " + expected);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Cohort

Cohort::Cohort(std::vector<std::string> ids, std::vector<double> times, std::vector<int> events,
               int k_events, std::vector<std::string> covariate_names,
               std::vector<double> covariates)
    : ids_(std::move(ids)),
      times_(std::move(times)),
      events_(std::move(events)),
      k_events_(k_events),
      covariate_names_(std::move(covariate_names)),
      covariates_(std::move(covariates)) {
  if (k_events_ < 1) throw ValidationError("number of competing events must be positive");
  if (ids_.size() != times_.size() || events_.size() != times_.size())
    throw ValidationError("cohort columns have different lengths");
  if (covariates_.size() != covariate_names_.size() * times_.size())
    throw ValidationError("covariate matrix does not match record count");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!(times_[i] >= 0.0) || !std::isfinite(times_[i]))
      throw ValidationError("record " + std::to_string(i) + ": negative or non-finite time");
    if (events_[i] < 0 || events_[i] > k_events_)
      throw ValidationError("record " + std::to_string(i) + ": event label out of range");
  }
}

std::span<const double> Cohort::covariates(std::size_t i) const {
  return {covariates_.data() + i * covariate_names_.size(), covariate_names_.size()};
}

Cohort Cohort::subset(std::span<const std::size_t> rows) const {
  std::vector<std::string> ids;
  std::vector<double> times;
  std::vector<int> events;
  std::vector<double> cov;
  ids.reserve(rows.size());
  times.reserve(rows.size());
  events.reserve(rows.size());
  cov.reserve(rows.size() * covariate_count());
  for (auto r : rows) {
    ids.push_back(ids_.at(r));
    times.push_back(times_[r]);
    events.push_back(events_[r]);
    auto row = covariates(r);
    cov.insert(cov.end(), row.begin(), row.end());
  }
  return Cohort(std::move(ids), std::move(times), std::move(events), k_events_, covariate_names_,
                std::move(cov));
}

// ---------------------------------------------------------------------------
// TimeGrid

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw ValidationError("time grid needs at least two points");
  for (std::size_t j = 0; j < times_.size(); ++j) {
    if (!std::isfinite(times_[j]) || times_[j] <= 0.0)
      throw ValidationError("time grid values must be positive and finite");
    if (j > 0 && times_[j] <= times_[j - 1])
      throw ValidationError("time grid must be strictly increasing");
  }
}

std::ptrdiff_t TimeGrid::step_index(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return static_cast<std::ptrdiff_t>(it - times_.begin()) - 1;
}

// ---------------------------------------------------------------------------
// CifBundle

CifBundle::CifBundle(TimeGrid grid, int k_events, std::vector<std::string> sample_ids,
                     std::vector<double> values)
    : grid_(std::move(grid)),
      k_events_(k_events),
      sample_ids_(std::move(sample_ids)),
      values_(std::move(values)) {
  if (k_events_ < 1) throw ValidationError("number of competing events must be positive");
  const std::size_t d = grid_.size();
  if (values_.size() != sample_ids_.size() * static_cast<std::size_t>(k_events_) * d)
    throw ValidationError("bundle value array does not match samples x events x grid");
  for (std::size_t s = 0; s < sample_ids_.size(); ++s) {
    for (int k = 1; k <= k_events_; ++k) {
      auto c = curve(s, k);
      for (std::size_t j = 0; j < d; ++j) {
        if (!(c[j] >= 0.0 && c[j] <= 1.0))
          throw ValidationError("sample " + sample_ids_[s] + ", event " + std::to_string(k) +
                                ": cif outside [0,1]");
        if (j > 0 && c[j] < c[j - 1])
          throw ValidationError("sample " + sample_ids_[s] + ", event " + std::to_string(k) +
                                ": CIF not nondecreasing");
      }
    }
    for (std::size_t j = 0; j < d; ++j) {
      double total = 0.0;
      for (int k = 1; k <= k_events_; ++k) total += at(s, k, j);
      if (total > 1.0 + kSumTolerance)
        throw ValidationError("sample " + sample_ids_[s] + ": event probabilities exceed 1");
    }
  }
}

double CifBundle::cif(std::size_t sample, int k, double t) const {
  const auto j = grid_.step_index(t);
  return j < 0 ? 0.0 : at(sample, k, static_cast<std::size_t>(j));
}

double CifBundle::survival_at(std::size_t sample, std::size_t j) const {
  double total = 0.0;
  for (int k = 1; k <= k_events_; ++k) total += at(sample, k, j);
  return std::max(0.0, 1.0 - total);
}

double CifBundle::survival(std::size_t sample, double t) const {
  const auto j = grid_.step_index(t);
  return j < 0 ? 1.0 : survival_at(sample, static_cast<std::size_t>(j));
}

void CifBundle::require_positive_terminal() const {
  for (std::size_t s = 0; s < size(); ++s)
    for (int k = 1; k <= k_events_; ++k)
      if (!(terminal(s, k) > 0.0))
        throw ValidationError("sample " + sample_ids_[s] + ", event " + std::to_string(k) +
                              ": terminal CIF is zero");
}

CifBundle CifBundle::select(std::span<const std::string> ids) const {
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t s = 0; s < sample_ids_.size(); ++s) index.emplace(sample_ids_[s], s);
  const std::size_t stride = static_cast<std::size_t>(k_events_) * grid_.size();
  std::vector<double> values;
  values.reserve(ids.size() * stride);
  for (const auto& id : ids) {
    auto it = index.find(id);
    if (it == index.end()) throw ValidationError("bundle has no predictions for sample " + id);
    auto first = values_.begin() + static_cast<std::ptrdiff_t>(it->second * stride);
    values.insert(values.end(), first, first + static_cast<std::ptrdiff_t>(stride));
  }
  return CifBundle(grid_, k_events_, std::vector<std::string>(ids.begin(), ids.end()),
                   std::move(values));
}

void require_aligned(const CifBundle& bundle, const Cohort& cohort) {
  if (bundle.size() != cohort.size())
    throw ValidationError("misaligned ids: bundle has " + std::to_string(bundle.size()) +
                          " samples, cohort has " + std::to_string(cohort.size()));
  if (bundle.k_events() != cohort.k_events())
    throw ValidationError("bundle and cohort disagree on the number of events");
  for (std::size_t i = 0; i < cohort.size(); ++i)
    if (bundle.sample_ids()[i] != cohort.ids()[i])
      throw ValidationError("misaligned ids at position " + std::to_string(i));
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Cohort parse_cohort(std::string_view csv_text, int k_events) {
  if (k_events < 1) throw ValidationError("number of competing events must be positive");
  const auto lines = lines_of(csv_text);
  if (lines.empty()) throw ValidationError("cohort CSV is empty");
  const auto header = split_fields(lines.front().second);
  require_header(header, {"id", "time", "event"}, "cohort CSV");
  std::vector<std::string> cov_names(header.begin() + 3, header.end());

  std::vector<std::string> ids;
  std::vector<double> times;
  std::vector<int> events;
  std::vector<double> cov;
  std::unordered_set<std::string> seen;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto row = lines[l].first;
    const auto fields = split_fields(lines[l].second);
    if (fields.size() != header.size())
      fail_row(row, "expected " + std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    std::string id(fields[0]);
    if (id.empty()) fail_row(row, "empty id");
    if (!seen.insert(id).second) fail_row(row, "duplicate id '" + id + "'");
    const double t = parse_real(fields[1], row, "time");
    if (t < 0.0) fail_row(row, "negative time");
    const int e = parse_int(fields[2], row, "event");
    if (e < 0 || e > k_events) fail_row(row, "event label out of range");
    for (std::size_t c = 3; c < fields.size(); ++c)
      cov.push_back(parse_real(fields[c], row, header[c]));
    ids.push_back(std::move(id));
    times.push_back(t);
    events.push_back(e);
  }
  return Cohort(std::move(ids), std::move(times), std::move(events), k_events,
                std::move(cov_names), std::move(cov));
}

CifBundle parse_bundle(std::string_view csv_text, int k_events) {
  if (k_events < 1) throw ValidationError("number of competing events must be positive");
  const auto lines = lines_of(csv_text);
  if (lines.empty()) throw ValidationError("bundle CSV is empty");
  const auto header = split_fields(lines.front().second);
  require_header(header, {"sample_id", "event", "time", "cif"}, "bundle CSV");
  if (header.size() != 4) throw ValidationError("bundle CSV must have exactly four columns");

  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> sample_index;
  // (sample, event) -> time -> cif
  std::vector<std::vector<std::map<double, double>>> points;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto row = lines[l].first;
    const auto fields = split_fields(lines[l].second);
    if (fields.size() != 4) fail_row(row, "expected 4 fields");
    std::string id(fields[0]);
    if (id.empty()) fail_row(row, "empty sample_id");
    const int k = parse_int(fields[1], row, "event");
    if (k < 1 || k > k_events) fail_row(row, "event label out of range");
    const double t = parse_real(fields[2], row, "time");
    const double f = parse_real(fields[3], row, "cif");
    if (f < 0.0 || f > 1.0) fail_row(row, "cif outside [0,1]");
    auto [it, fresh] = sample_index.emplace(id, order.size());
    if (fresh) {
      order.push_back(id);
      points.emplace_back(static_cast<std::size_t>(k_events));
    }
    auto& curve = points[it->second][static_cast<std::size_t>(k - 1)];
    if (!curve.emplace(t, f).second)
      fail_row(row, "duplicate time for sample " + id + ", event " + std::to_string(k));
  }
  if (order.empty()) throw ValidationError("bundle CSV has no rows");

  std::vector<double> times;
  for (const auto& [t, f] : points.front().front()) times.push_back(t);
  std::vector<double> values;
  values.reserve(order.size() * static_cast<std::size_t>(k_events) * times.size());
  for (std::size_t s = 0; s < order.size(); ++s) {
    for (int k = 1; k <= k_events; ++k) {
      const auto& curve = points[s][static_cast<std::size_t>(k - 1)];
      bool same = curve.size() == times.size();
      std::size_t j = 0;
      for (auto it = curve.begin(); same && it != curve.end(); ++it) same = it->first == times[j++];
      if (!same)
        throw ValidationError("ragged grids: sample " + order[s] + ", event " +
                              std::to_string(k) + " does not cover the common time set");
      for (const auto& [t, f] : curve) values.push_back(f);
    }
  }
  CifBundle bundle(TimeGrid(std::move(times)), k_events, std::move(order), std::move(values));
  bundle.require_positive_terminal();
  return bundle;
}

std::string serialize_cohort(const Cohort& cohort) {
  std::ostringstream out;
  out << "id,time,event";
  for (const auto& name : cohort.covariate_names()) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    out << cohort.ids()[i] << ',' << format_double(cohort.time(i)) << ',' << cohort.event(i);
    for (double x : cohort.covariates(i)) out << ',' << format_double(x);
    out << '\n';
  }
  return out.str();
}

std::string serialize_bundle(const CifBundle& bundle) {
  std::string out = "sample_id,event,time,cif\n";
  const auto& grid = bundle.grid().times();
  std::vector<std::string> time_text;
  for (double t : grid) time_text.push_back(format_double(t));
  for (std::size_t s = 0; s < bundle.size(); ++s) {
    for (int k = 1; k <= bundle.k_events(); ++k) {
      const std::string prefix = bundle.sample_ids()[s] + ',' + std::to_string(k) + ',';
      for (std::size_t j = 0; j < grid.size(); ++j) {
        out += prefix;
        out += time_text[j];
        out += ',';
        out += format_double(bundle.at(s, k, j));
        out += '\n';
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Split and grid

CohortSplit split_cohort(const Cohort& cohort, std::uint64_t seed,
                         std::array<double, 3> fractions) {
  if (cohort.empty()) throw ValidationError("cannot split an empty cohort");
  double total = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw ValidationError("split fractions must be positive");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("split fractions must sum to 1");

  const std::size_t n = cohort.size();
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t p = 0; p < 3; ++p) {
    const double exact = static_cast<double>(n) * fractions[p];
    sizes[p] = static_cast<std::size_t>(std::floor(exact));
    remainder[p] = exact - static_cast<double>(sizes[p]);
    assigned += sizes[p];
  }
  std::array<std::size_t, 3> by_remainder{0, 1, 2};
  std::stable_sort(by_remainder.begin(), by_remainder.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++sizes[by_remainder[r % 3]];

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = Rng::substream(seed, "split");
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);

  CohortSplit split;
  std::size_t start = 0;
  for (std::size_t p = 0; p < 3; ++p) {
    split.rows[p].assign(perm.begin() + static_cast<std::ptrdiff_t>(start),
                         perm.begin() + static_cast<std::ptrdiff_t>(start + sizes[p]));
    std::sort(split.rows[p].begin(), split.rows[p].end());
    start += sizes[p];
  }
  split.train = cohort.subset(split.rows[0]);
  split.calibration = cohort.subset(split.rows[1]);
  split.test = cohort.subset(split.rows[2]);
  return split;
}

TimeGrid quantile_grid(const Cohort& cohort, std::size_t d) {
  if (cohort.empty()) throw ValidationError("quantile grid needs a nonempty cohort");
  if (d < 2) throw ValidationError("grid size must be at least 2");
  std::vector<double> sorted = cohort.times();
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  std::vector<double> times;
  for (std::size_t j = 1; j <= d; ++j) {
    const std::size_t rank = (j * n + d - 1) / d;  // ceil(j n / d), 1-based
    const double q = sorted[rank - 1];
    if (q > 0.0 && (times.empty() || q > times.back())) times.push_back(q);
  }
  if (times.size() < 2) throw ValidationError("degenerate duration distribution");
  return TimeGrid(std::move(times));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << content;
}

}  // namespace crcal
