#include "berthsim/stochastics.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "berthsim/error.hpp"

namespace berthsim {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

bool finite(double v) { return std::isfinite(v); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorKind::InvalidParams, "expected a number, got '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(DistKind kind) {
  switch (kind) {
    case DistKind::constant: return "const";
    case DistKind::uniform: return "uniform";
    case DistKind::triangular: return "tri";
    case DistKind::exponential: return "exp";
    case DistKind::bernoulli: return "bern";
    case DistKind::discrete: return "disc";
  }
  return "?";
}

Distribution Distribution::constant(double v) {
  Distribution d;
  d.kind_ = DistKind::constant;
  d.params_ = {v};
  return d;
}

Distribution Distribution::uniform(double a, double b) {
  Distribution d;
  d.kind_ = DistKind::uniform;
  d.params_ = {a, b};
  return d;
}

Distribution Distribution::triangular(double a, double mode, double b) {
  Distribution d;
  d.kind_ = DistKind::triangular;
  d.params_ = {a, mode, b};
  return d;
}

Distribution Distribution::exponential(double mean) {
  Distribution d;
  d.kind_ = DistKind::exponential;
  d.params_ = {mean};
  return d;
}

Distribution Distribution::bernoulli(double p) {
  Distribution d;
  d.kind_ = DistKind::bernoulli;
  d.params_ = {p};
  return d;
}

Distribution Distribution::discrete(std::vector<std::pair<double, double>> value_weights) {
  Distribution d;
  d.kind_ = DistKind::discrete;
  d.params_.clear();
  d.table_ = std::move(value_weights);
  return d;
}

std::optional<std::string> Distribution::check() const {
  for (double p : params_)
    if (!finite(p)) return "non-finite parameter in " + to_string();
  switch (kind_) {
    case DistKind::constant:
      if (params_.size() != 1) return std::string("const takes 1 parameter");
      break;
    case DistKind::uniform:
      if (params_.size() != 2) return std::string("uniform takes 2 parameters");
      if (params_[0] > params_[1]) return "uniform requires a <= b in " + to_string();
      break;
    case DistKind::triangular:
      if (params_.size() != 3) return std::string("tri takes 3 parameters");
      if (!(params_[0] <= params_[1] && params_[1] <= params_[2]))
        return "tri requires a <= m <= b in " + to_string();
      break;
    case DistKind::exponential:
      if (params_.size() != 1) return std::string("exp takes 1 parameter");
      if (!(params_[0] > 0)) return "exp requires mean > 0 in " + to_string();
      break;
    case DistKind::bernoulli:
      if (params_.size() != 1) return std::string("bern takes 1 parameter");
      if (!(params_[0] >= 0 && params_[0] <= 1)) return "bern requires p in [0,1] in " + to_string();
      break;
    case DistKind::discrete:
      if (table_.empty()) return std::string("disc requires at least one value:weight pair");
      for (const auto& [v, w] : table_) {
        if (!finite(v) || !finite(w)) return "non-finite entry in " + to_string();
        if (!(w > 0)) return "disc weights must be positive in " + to_string();
      }
      break;
  }
  return std::nullopt;
}

double Distribution::mean() const {
  switch (kind_) {
    case DistKind::constant: return params_[0];
    case DistKind::uniform: return 0.5 * (params_[0] + params_[1]);
    case DistKind::triangular: return (params_[0] + params_[1] + params_[2]) / 3.0;
    case DistKind::exponential: return params_[0];
    case DistKind::bernoulli: return params_[0];
    case DistKind::discrete: {
      double wsum = 0, acc = 0;
      for (const auto& [v, w] : table_) {
        wsum += w;
        acc += v * w;
      }
      return acc / wsum;
    }
  }
  return 0;
}

double Distribution::variance() const {
  switch (kind_) {
    case DistKind::constant: return 0;
    case DistKind::uniform: {
      double w = params_[1] - params_[0];
      return w * w / 12.0;
    }
    case DistKind::triangular: {
      double a = params_[0], m = params_[1], b = params_[2];
      return (a * a + m * m + b * b - a * m - a * b - m * b) / 18.0;
    }
    case DistKind::exponential: return params_[0] * params_[0];
    case DistKind::bernoulli: return params_[0] * (1 - params_[0]);
    case DistKind::discrete: {
      double mu = mean(), wsum = 0, acc = 0;
      for (const auto& [v, w] : table_) {
        wsum += w;
        acc += (v - mu) * (v - mu) * w;
      }
      return acc / wsum;
    }
  }
  return 0;
}

double Distribution::lower() const {
  switch (kind_) {
    case DistKind::constant:
    case DistKind::uniform:
    case DistKind::triangular: return params_[0];
    case DistKind::exponential:
    case DistKind::bernoulli: return 0;
    case DistKind::discrete: {
      double lo = std::numeric_limits<double>::infinity();
      for (const auto& [v, w] : table_) lo = std::min(lo, v);
      return lo;
    }
  }
  return 0;
}

double Distribution::upper() const {
  switch (kind_) {
    case DistKind::constant: return params_[0];
    case DistKind::uniform: return params_[1];
    case DistKind::triangular: return params_[2];
    case DistKind::exponential: return std::numeric_limits<double>::infinity();
    case DistKind::bernoulli: return 1;
    case DistKind::discrete: {
      double hi = -std::numeric_limits<double>::infinity();
      for (const auto& [v, w] : table_) hi = std::max(hi, v);
      return hi;
    }
  }
  return 0;
}

Distribution Distribution::scaled_to_mean(double target) const {
  switch (kind_) {
    case DistKind::constant: return constant(target);
    case DistKind::exponential: return exponential(target);
    case DistKind::uniform:
    case DistKind::triangular: {
      double m = mean();
      if (m == 0) throw Error(ErrorKind::InvalidParams, "cannot rescale zero-mean " + to_string());
      Distribution d = *this;
      for (auto& p : d.params_) p *= target / m;
      return d;
    }
    case DistKind::bernoulli:
    case DistKind::discrete: break;
  }
  throw Error(ErrorKind::InvalidParams, "cannot rescale " + to_string());
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string Distribution::to_string() const {
  std::string out(berthsim::to_string(kind_));
  out += '(';
  if (kind_ == DistKind::discrete) {
    for (std::size_t i = 0; i < table_.size(); ++i) {
      if (i) out += ',';
      out += format_number(table_[i].first) + ':' + format_number(table_[i].second);
    }
  } else {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (i) out += ',';
      out += format_number(params_[i]);
    }
  }
  out += ')';
  return out;
}

Distribution parse_distribution(std::string_view text) {
  text = trim(text);
  auto open = text.find('(');
  if (open == std::string_view::npos || text.empty() || text.back() != ')')
    throw Error(ErrorKind::InvalidParams, "malformed distribution '" + std::string(text) + "'");
  auto name = trim(text.substr(0, open));
  auto body = text.substr(open + 1, text.size() - open - 2);
  if (body.find_first_of("()") != std::string_view::npos)
    throw Error(ErrorKind::InvalidParams, "malformed distribution '" + std::string(text) + "'");

  if (name == "disc") {
    std::vector<std::pair<double, double>> table;
    for (auto item : split(body, ',')) {
      auto parts = split(item, ':');
      if (parts.size() != 2)
        throw Error(ErrorKind::InvalidParams, "disc entries are value:weight, got '" + std::string(item) + "'");
      table.emplace_back(parse_real(parts[0]), parse_real(parts[1]));
    }
    return Distribution::discrete(std::move(table));
  }

  std::vector<double> args;
  if (!trim(body).empty())
    for (auto item : split(body, ',')) args.push_back(parse_real(item));

  auto need = [&](std::size_t n) {
    if (args.size() != n)
      throw Error(ErrorKind::InvalidParams, std::string(name) + " takes " + std::to_string(n) + " parameter(s)");
  };
  if (name == "const") {
    need(1);
    return Distribution::constant(args[0]);
  }
  if (name == "uniform") {
    need(2);
    return Distribution::uniform(args[0], args[1]);
  }
  if (name == "tri") {
    need(3);
    return Distribution::triangular(args[0], args[1], args[2]);
  }
  if (name == "exp") {
    need(1);
    return Distribution::exponential(args[0]);
  }
  if (name == "bern") {
    need(1);
    return Distribution::bernoulli(args[0]);
  }
  throw Error(ErrorKind::InvalidParams, "unknown distribution '" + std::string(name) + "'");
}

RandomStream::RandomStream(std::uint64_t master_seed, std::string name)
    : master_seed_(master_seed), name_(std::move(name)) {
  key_ = mix64(mix64(master_seed_ + kGolden) ^ fnv1a(name_));
}

std::uint64_t RandomStream::next_u64() {
  std::uint64_t counter = draws_++;
  return mix64(key_ ^ mix64(counter * kGolden + 0x632BE59BD9B4E019ULL));
}

double RandomStream::next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

RandomStream derive_stream(std::uint64_t master_seed, std::string_view stream_name) {
  return RandomStream(master_seed, std::string(stream_name));
}

double sample(const Distribution& d, RandomStream& stream) {
  if (auto bad = d.check()) throw Error(ErrorKind::InvalidParams, *bad);
  double u = stream.next_uniform();
  auto p = d.params();
  switch (d.kind()) {
    case DistKind::constant: return p[0];
    case DistKind::uniform: return p[0] + (p[1] - p[0]) * u;
    case DistKind::triangular: {
      double a = p[0], m = p[1], b = p[2];
      if (b == a) return a;
      double split = (m - a) / (b - a);
      if (u < split) return a + std::sqrt(u * (b - a) * (m - a));
      return b - std::sqrt((1 - u) * (b - a) * (b - m));
    }
    case DistKind::exponential: return -p[0] * std::log1p(-u);
    case DistKind::bernoulli: return u < p[0] ? 1.0 : 0.0;
    case DistKind::discrete: {
      const auto& table = d.table();
      double total = 0;
      for (const auto& [v, w] : table) total += w;
      double target = u * total, acc = 0;
      for (const auto& [v, w] : table) {
        acc += w;
        if (target < acc) return v;
      }
      return table.back().first;
    }
  }
  return 0;
}

}  // namespace berthsim
