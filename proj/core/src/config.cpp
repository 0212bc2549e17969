#include "blowup/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "blowup/error.hpp"
#include "blowup/format.hpp"
#include "blowup/volterra.hpp"

namespace blowup {

namespace {

constexpr std::array<std::pair<RunKind, std::string_view>, 7> kRunNames = {{
    {RunKind::Classify, "classify"},
    {RunKind::Integrate, "integrate"},
    {RunKind::DetectBlowup, "detect-blowup"},
    {RunKind::Construct, "construct"},
    {RunKind::Majorize, "majorize"},
    {RunKind::Pipeline, "pipeline"},
    {RunKind::VerifyComparison, "verify-lemma22"},
}};

std::optional<long long> parse_integer(std::string_view text) {
  text = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

std::string format_list(const std::vector<double>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_double(xs[i]);
  }
  return out + "]";
}

}  // namespace

std::string_view to_string(RunKind r) {
  for (const auto& [kind, name] : kRunNames) {
    if (kind == r) return name;
  }
  return "pipeline";
}

std::optional<RunKind> parse_run_kind(std::string_view text) {
  for (const auto& [kind, name] : kRunNames) {
    if (name == text) return kind;
  }
  return std::nullopt;
}

std::optional<std::vector<double>> parse_double_list(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') return std::nullopt;
    text = trim(text.substr(1, text.size() - 2));
  }
  std::vector<double> out;
  if (text.empty()) return out;
  while (true) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    auto v = parse_double(item);
    if (!v) return std::nullopt;
    out.push_back(*v);
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return out;
}

std::vector<double> ExperimentConfig::majorant_data() const {
  if (b) return *b;
  std::vector<double> out;
  for (std::size_t i = static_cast<std::size_t>(k); i < a.size(); ++i) out.push_back(a[i] + 1.0);
  return out;
}

ProblemSpec ExperimentConfig::problem() const {
  ProblemSpec p;
  p.m = m;
  p.k = k;
  p.a = a;
  p.q = q;
  p.h = h;
  return p;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  const auto g_repr = [](const std::optional<ScalarFn>& f) {
    return f ? std::optional<std::string>(f->repr()) : std::nullopt;
  };
  return m == o.m && k == o.k && a == o.a && q.repr() == o.q.repr() && h.repr() == o.h.repr() &&
         run == o.run && n == o.n && T == o.T && tol == o.tol && thresholds == o.thresholds &&
         J == o.J && seed == o.seed && horizon == o.horizon && alpha == o.alpha && u0 == o.u0 &&
         g_repr(g) == g_repr(o.g) && b == o.b && max_iter == o.max_iter && grid == o.grid &&
         rho == o.rho && trials == o.trials && out == o.out && csv == o.csv;
}

std::string ConfigError::to_string() const {
  std::string s = "line " + std::to_string(line);
  if (column > 0) s += ", column " + std::to_string(column);
  if (!key.empty()) s += " [" + key + "]";
  return s + ": " + message;
}

std::vector<ConfigError> validate_config(const ExperimentConfig& c) {
  std::vector<ConfigError> errs;
  auto err = [&errs](std::string key, std::string msg) {
    errs.push_back({0, 0, std::move(key), std::move(msg)});
  };
  if (c.m < 1) err("m", "m must be >= 1");
  if (c.k < 0 || c.k > c.m - 1) err("k", "k must satisfy 0 <= k <= m-1");
  if (c.a.size() != static_cast<std::size_t>(std::max(c.m, 0))) {
    err("a", "a must list m = " + std::to_string(c.m) + " values");
  }
  for (double ai : c.a) {
    if (!(ai >= 0.0) || !std::isfinite(ai)) {
      err("a", "initial values must be finite and >= 0");
      break;
    }
  }
  if (c.n && *c.n < 1) err("n", "n must be >= 1");
  if (!(c.T > 0.0) || !std::isfinite(c.T)) err("T", "T must be positive and finite");
  if (!(c.tol > 1e-14 && c.tol < 1e-2)) err("tol", "tol must lie in (1e-14, 1e-2)");
  if (c.thresholds.empty()) err("thresholds", "at least one threshold is required");
  for (std::size_t i = 0; i < c.thresholds.size(); ++i) {
    if (!(c.thresholds[i] >= 10.0) || (i > 0 && !(c.thresholds[i] > c.thresholds[i - 1]))) {
      err("thresholds", "thresholds must be >= 10 and strictly increasing");
      break;
    }
  }
  if (c.J < 0) err("J", "J must be >= 0");
  if (!(c.horizon > 0.0) || !std::isfinite(c.horizon)) err("horizon", "horizon must be positive and finite");
  if (!(c.alpha > 0.0) || !std::isfinite(c.alpha)) err("alpha", "alpha must be > 0");
  if (!(c.u0 > 0.0) || !std::isfinite(c.u0)) err("u0", "u0 must be > 0");
  if (c.b) {
    const int nn = c.reduced_order();
    if (c.b->size() != static_cast<std::size_t>(std::max(nn, 0))) {
      err("b", "b must list n = " + std::to_string(nn) + " values");
    }
    for (double bi : *c.b) {
      if (!(bi > 0.0) || !std::isfinite(bi)) {
        err("b", "b values must be finite and > 0");
        break;
      }
    }
  }
  if (c.max_iter < 1) err("max_iter", "max_iter must be >= 1");
  if (c.grid < 2) err("grid", "grid must be >= 2");
  if (!(c.rho > 1.0) || !std::isfinite(c.rho)) err("rho", "rho must be > 1");
  if (c.trials < 0) err("trials", "trials must be >= 0");
  if (c.out.empty()) err("out", "out must not be empty");
  return errs;
}

ConfigParseResult parse_config(std::string_view text) {
  ExperimentConfig cfg;
  ConfigParseResult result;
  std::map<std::string, int, std::less<>> seen;
  std::map<std::string, int, std::less<>> key_lines;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view raw = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    if (trim(raw).empty()) continue;

    const auto eq = raw.find('=');
    if (eq == std::string_view::npos) {
      result.errors.push_back({line_no, 1, "", "expected `key = value`"});
      continue;
    }
    const std::string key(trim(raw.substr(0, eq)));
    const std::string_view value = trim(raw.substr(eq + 1));
    const std::size_t value_offset = raw.find_first_not_of(" \t\r", eq + 1);
    const int value_col = static_cast<int>(value_offset == std::string_view::npos ? eq + 2 : value_offset + 1);
    auto fail = [&](std::string msg) {
      result.errors.push_back({line_no, value_col, key, std::move(msg)});
    };
    if (key.empty()) {
      result.errors.push_back({line_no, 1, "", "missing key before `=`"});
      continue;
    }
    if (auto it = seen.find(key); it != seen.end()) {
      fail("duplicate key (first set on line " + std::to_string(it->second) + ")");
      continue;
    }
    seen.emplace(key, line_no);
    key_lines.emplace(key, line_no);

    auto set_int = [&](int& dst) {
      if (auto v = parse_integer(value)) {
        dst = static_cast<int>(*v);
      } else {
        fail("expected an integer, got `" + std::string(value) + "`");
      }
    };
    auto set_double = [&](double& dst) {
      if (auto v = parse_double(value)) {
        dst = *v;
      } else {
        fail("expected a number, got `" + std::string(value) + "`");
      }
    };
    auto set_list = [&](std::vector<double>& dst) {
      if (auto v = parse_double_list(value)) {
        dst = std::move(*v);
      } else {
        fail("expected a list of numbers like [1, 0], got `" + std::string(value) + "`");
      }
    };
    auto parse_fn = [&]() -> std::optional<ScalarFn> {
      try {
        return parse_fn_spec(value);
      } catch (const Error& e) {
        fail(e.what());
        return std::nullopt;
      }
    };

    if (key == "m") {
      set_int(cfg.m);
    } else if (key == "k") {
      set_int(cfg.k);
    } else if (key == "a") {
      set_list(cfg.a);
    } else if (key == "q") {
      if (auto f = parse_fn()) cfg.q = *f;
    } else if (key == "h") {
      if (auto f = parse_fn()) cfg.h = *f;
    } else if (key == "g") {
      if (auto f = parse_fn()) cfg.g = *f;
    } else if (key == "run") {
      if (auto r = parse_run_kind(value)) {
        cfg.run = *r;
      } else {
        fail("unknown run `" + std::string(value) + "`");
      }
    } else if (key == "n") {
      int v = 0;
      set_int(v);
      cfg.n = v;
    } else if (key == "T") {
      set_double(cfg.T);
    } else if (key == "tol") {
      set_double(cfg.tol);
    } else if (key == "thresholds") {
      set_list(cfg.thresholds);
    } else if (key == "J") {
      set_int(cfg.J);
    } else if (key == "seed") {
      const auto t = trim(value);
      std::uint64_t v = 0;
      const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc() || ptr != t.data() + t.size()) {
        fail("expected a nonnegative integer seed");
      } else {
        cfg.seed = v;
      }
    } else if (key == "horizon") {
      set_double(cfg.horizon);
    } else if (key == "alpha") {
      set_double(cfg.alpha);
    } else if (key == "u0") {
      set_double(cfg.u0);
    } else if (key == "b") {
      std::vector<double> v;
      set_list(v);
      cfg.b = std::move(v);
    } else if (key == "max_iter") {
      set_int(cfg.max_iter);
    } else if (key == "grid") {
      set_int(cfg.grid);
    } else if (key == "rho") {
      set_double(cfg.rho);
    } else if (key == "trials") {
      set_int(cfg.trials);
    } else if (key == "out") {
      cfg.out = std::string(value);
    } else if (key == "csv") {
      cfg.csv = std::string(value);
    } else {
      result.errors.push_back({line_no, 1, key, "unknown key `" + key + "`"});
    }
  }

  if (!result.errors.empty()) return result;
  for (auto& e : validate_config(cfg)) {
    if (auto it = key_lines.find(e.key); it != key_lines.end()) e.line = it->second;
    result.errors.push_back(std::move(e));
  }
  if (result.errors.empty()) result.config = std::move(cfg);
  return result;
}

std::string emit_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "m = " << c.m << '\n';
  os << "k = " << c.k << '\n';
  os << "a = " << format_list(c.a) << '\n';
  os << "q = " << c.q.repr() << '\n';
  os << "h = " << c.h.repr() << '\n';
  os << "run = " << to_string(c.run) << '\n';
  if (c.n) os << "n = " << *c.n << '\n';
  os << "T = " << format_double(c.T) << '\n';
  os << "tol = " << format_double(c.tol) << '\n';
  os << "thresholds = " << format_list(c.thresholds) << '\n';
  os << "J = " << c.J << '\n';
  os << "seed = " << c.seed << '\n';
  os << "horizon = " << format_double(c.horizon) << '\n';
  os << "alpha = " << format_double(c.alpha) << '\n';
  os << "u0 = " << format_double(c.u0) << '\n';
  if (c.g) os << "g = " << c.g->repr() << '\n';
  if (c.b) os << "b = " << format_list(*c.b) << '\n';
  os << "max_iter = " << c.max_iter << '\n';
  os << "grid = " << c.grid << '\n';
  os << "rho = " << format_double(c.rho) << '\n';
  os << "trials = " << c.trials << '\n';
  os << "out = " << c.out << '\n';
  if (c.csv) os << "csv = " << *c.csv << '\n';
  return os.str();
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidParameter("cannot open config file `" + path + "`");
  std::ostringstream buf;
  buf << in.rdbuf();
  auto parsed = parse_config(buf.str());
  if (!parsed.ok()) {
    std::string msg = path + ":";
    for (const auto& e : parsed.errors) msg += "\n  " + e.to_string();
    throw InvalidParameter(msg);
  }
  return std::move(*parsed.config);
}

}  // namespace blowup
