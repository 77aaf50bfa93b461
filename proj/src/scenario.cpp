#include "torusflow/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "torusflow/error.hpp"

namespace torusflow {
namespace {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Block {
  std::string id;
  int line = 0;
  std::vector<Entry> entries;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t j = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > j) out.push_back(s.substr(j, i - j));
  }
  return out;
}

double parse_double(std::string_view token, const Entry& e) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ParseError(e.line, "key '" + e.key + "': '" + std::string(token) + "' is not a finite decimal number");
  return v;
}

long long parse_integer(std::string_view token, const Entry& e) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw ParseError(e.line, "key '" + e.key + "': '" + std::string(token) + "' is not an integer");
  return v;
}

std::vector<double> parse_numbers(std::string_view s, const Entry& e, std::size_t expected) {
  std::vector<double> v;
  for (auto t : tokens(s)) v.push_back(parse_double(t, e));
  if (v.size() != expected)
    throw ParseError(e.line, "key '" + e.key + "' expects " + std::to_string(expected) + " numbers, got " +
                                 std::to_string(v.size()));
  return v;
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

FourierTerm parse_term(const Entry& e, int dim) {
  const auto parts = split(e.value, ':');
  if (parts.size() != 2) throw ParseError(e.line, "key '" + e.key + "' expects '<k_1 .. k_d> : <cos> <sin>'");
  const auto k = parse_numbers(parts[0], e, static_cast<std::size_t>(dim));
  const auto c = parse_numbers(parts[1], e, 2);
  return FourierTerm{k, c[0], c[1]};
}

// Accumulates the pieces of one scalar field named by a key prefix.
struct FieldParts {
  std::vector<FourierTerm> terms;
  std::optional<FieldMode> mode;
  std::optional<double> offset;
  int line = 0;

  ScalarField build(int dim, const std::string& name) const {
    try {
      return ScalarField(dim, terms, mode.value_or(FieldMode::Raw), offset.value_or(0.0));
    } catch (const Error& err) {
      throw ParseError(line, "field '" + name + "': " + err.what());
    }
  }
};

class BlockReader {
 public:
  explicit BlockReader(const Block& block) : block_(block) {}

  Scenario read() {
    family_ = single("family");
    const auto dim_entry = find_single("dim");
    if (!dim_entry) throw ParseError(block_.line, "scenario '" + block_.id + "' is missing 'dim'");
    dim_ = static_cast<int>(parse_integer(trim(dim_entry->value), *dim_entry));
    if (dim_ < 1 || dim_ > 16) throw ParseError(dim_entry->line, "dim must lie in [1, 16]");
    declare_field_keys();

    std::map<std::string, FieldParts> parts;
    std::set<std::string> seen;
    RunSettings run;
    std::optional<std::vector<Vec>> starts;
    std::string output = block_.id;
    std::optional<Vec> xi;
    std::optional<IntMat> lattice;

    for (const auto& e : block_.entries) {
      const bool repeatable = e.key.ends_with(".term");
      if (!repeatable && !seen.insert(e.key).second) throw ParseError(e.line, "duplicate key '" + e.key + "'");
      const std::string_view value = trim(e.value);

      if (e.key == "family" || e.key == "dim") continue;
      if (e.key == "t_end") run.t_end = positive(value, e);
      else if (e.key == "rtol") run.rtol = positive(value, e);
      else if (e.key == "atol") run.atol = positive(value, e);
      else if (e.key == "grid") run.grid = static_cast<int>(parse_integer(value, e));
      else if (e.key == "bound") run.search_bound = static_cast<int>(parse_integer(value, e));
      else if (e.key == "seed") run.seed = static_cast<std::uint64_t>(parse_integer(value, e));
      else if (e.key == "panel") run.panel_size = static_cast<int>(parse_integer(value, e));
      else if (e.key == "rel_tol") run.rel_tol = nonnegative(value, e);
      else if (e.key == "abs_tol") run.abs_tol = nonnegative(value, e);
      else if (e.key == "period_horizon") run.period_horizon = positive(value, e);
      else if (e.key == "period_tol") run.period_tol = positive(value, e);
      else if (e.key == "output") output = std::string(value);
      else if (e.key == "starts") {
        std::vector<Vec> pts;
        for (auto p : split(value, ';')) pts.push_back(to_vec(parse_numbers(p, e, dim_)));
        starts = std::move(pts);
      } else if (e.key == "xi" && has_direction()) {
        xi = to_vec(parse_numbers(value, e, dim_));
      } else if (e.key == "phi.lattice" && family_ == "rectified") {
        const auto rows = split(value, ';');
        if (static_cast<int>(rows.size()) != dim_)
          throw ParseError(e.line, "phi.lattice needs " + std::to_string(dim_) + " rows");
        IntMat m(dim_, dim_);
        for (int i = 0; i < dim_; ++i) {
          const auto row = tokens(rows[i]);
          if (static_cast<int>(row.size()) != dim_) throw ParseError(e.line, "phi.lattice rows need d integers");
          for (int j = 0; j < dim_; ++j) m(i, j) = parse_integer(row[j], e);
        }
        lattice = std::move(m);
      } else if (e.key == "A.ridge" && family_ == "current") {
        ridge_ = nonnegative(value, e);
      } else if (auto prefix = field_prefix(e.key)) {
        auto& fp = parts[prefix->first];
        if (fp.line == 0) fp.line = e.line;
        const auto& attr = prefix->second;
        if (attr == "term") {
          fp.terms.push_back(parse_term(e, dim_));
        } else if (attr == "mode") {
          if (value == "raw") fp.mode = FieldMode::Raw;
          else if (value == "squared") fp.mode = FieldMode::Squared;
          else throw ParseError(e.line, "key '" + e.key + "' must be 'raw' or 'squared'");
        } else {
          fp.offset = nonnegative(value, e);
        }
      } else {
        throw ParseError(e.line, "unknown key '" + e.key + "' in scenario '" + block_.id + "'");
      }
    }

    if (run.grid < 2) throw ParseError(block_.line, "grid must be at least 2");
    if (run.search_bound < 1) throw ParseError(block_.line, "bound must be positive");
    if (run.panel_size < 1) throw ParseError(block_.line, "panel must be positive");
    if (!(run.rtol <= 1e-2 && run.atol <= 1e-2)) throw ParseError(block_.line, "rtol and atol must not exceed 1e-2");

    auto field = [&](const std::string& name, bool required) -> ScalarField {
      auto it = parts.find(name);
      if (it == parts.end()) {
        if (required) throw ParseError(block_.line, "scenario '" + block_.id + "' is missing field '" + name + "'");
        return ScalarField::constant(dim_, 0.0);
      }
      return it->second.build(dim_, name);
    };
    auto require_xi = [&]() -> Vec {
      if (!xi) throw ParseError(block_.line, "scenario '" + block_.id + "' is missing 'xi'");
      return *xi;
    };

    std::optional<FieldSpec> spec;
    try {
      if (family_ == "direction") {
        spec = FieldSpec::direction(field("a", true), require_xi());
      } else if (family_ == "rectified") {
        if (!lattice) throw ParseError(block_.line, "scenario '" + block_.id + "' is missing 'phi.lattice'");
        std::vector<ScalarField> periodic;
        for (int i = 1; i <= dim_; ++i) periodic.push_back(field("phi.periodic." + std::to_string(i), false));
        spec = FieldSpec::rectified(field("a", true), require_xi(), Diffeomorphism(*lattice, std::move(periodic)));
      } else if (family_ == "current") {
        std::vector<ScalarField> factor;
        for (int i = 1; i <= dim_; ++i)
          for (int j = 1; j <= dim_; ++j)
            factor.push_back(field("A.factor." + std::to_string(i) + "." + std::to_string(j), false));
        spec = FieldSpec::current(MatrixField(dim_, std::move(factor), ridge_), field("v", true));
      } else if (family_ == "oned") {
        spec = FieldSpec::one_d(field("b", true));
      } else {
        std::vector<ScalarField> comps;
        for (int i = 1; i <= dim_; ++i) comps.push_back(field("b." + std::to_string(i), true));
        spec = FieldSpec::generic(std::move(comps));
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& err) {
      throw ParseError(block_.line, "scenario '" + block_.id + "': " + err.what());
    }

    std::vector<Vec> pts = starts.value_or(std::vector<Vec>{Vec::Zero(dim_)});
    return Scenario{block_.id, spec->with_label(block_.id), std::move(pts), run, output};
  }

 private:
  bool has_direction() const { return family_ == "direction" || family_ == "rectified"; }

  std::optional<Entry> find_single(const std::string& key) const {
    std::optional<Entry> found;
    for (const auto& e : block_.entries)
      if (e.key == key) {
        if (found) throw ParseError(e.line, "duplicate key '" + key + "'");
        found = e;
      }
    return found;
  }

  std::string single(const std::string& key) const {
    auto e = find_single(key);
    if (!e) throw ParseError(block_.line, "scenario '" + block_.id + "' is missing '" + key + "'");
    std::string v(trim(e->value));
    if (key == "family" && v != "direction" && v != "rectified" && v != "current" && v != "oned" && v != "generic")
      throw ParseError(e->line, "unknown family '" + v + "'");
    return v;
  }

  void declare_field_keys() {
    auto add = [&](const std::string& p) { prefixes_.insert(p); };
    if (family_ == "direction") add("a");
    if (family_ == "rectified") {
      add("a");
      for (int i = 1; i <= dim_; ++i) add("phi.periodic." + std::to_string(i));
    }
    if (family_ == "current") {
      add("v");
      for (int i = 1; i <= dim_; ++i)
        for (int j = 1; j <= dim_; ++j) add("A.factor." + std::to_string(i) + "." + std::to_string(j));
    }
    if (family_ == "oned") add("b");
    if (family_ == "generic")
      for (int i = 1; i <= dim_; ++i) add("b." + std::to_string(i));
  }

  std::optional<std::pair<std::string, std::string>> field_prefix(const std::string& key) const {
    const auto dot = key.rfind('.');
    if (dot == std::string::npos) return std::nullopt;
    std::string prefix = key.substr(0, dot);
    std::string attr = key.substr(dot + 1);
    if (!prefixes_.contains(prefix)) return std::nullopt;
    if (attr != "term" && attr != "mode" && attr != "offset") return std::nullopt;
    return std::make_pair(prefix, attr);
  }

  double positive(std::string_view v, const Entry& e) const {
    const double x = parse_double(v, e);
    if (!(x > 0.0)) throw ParseError(e.line, "key '" + e.key + "' must be positive");
    return x;
  }
  double nonnegative(std::string_view v, const Entry& e) const {
    const double x = parse_double(v, e);
    if (!(x >= 0.0)) throw ParseError(e.line, "key '" + e.key + "' must be nonnegative");
    return x;
  }

  const Block& block_;
  std::string family_;
  int dim_ = 0;
  double ridge_ = 0.0;
  std::set<std::string> prefixes_;
};

bool valid_id(std::string_view id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

}  // namespace

std::vector<Scenario> parse_scenarios(std::string_view text) {
  std::vector<Block> blocks;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      const auto inner = tokens(line.substr(1, line.size() - 2));
      if (inner.size() != 2 || inner[0] != "scenario" || !valid_id(inner[1]))
        throw ParseError(line_no, "section header must read '[scenario <id>]'");
      for (const auto& b : blocks)
        if (b.id == inner[1]) throw ParseError(line_no, "duplicate scenario id '" + std::string(inner[1]) + "'");
      blocks.push_back(Block{std::string(inner[1]), line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    if (blocks.empty()) throw ParseError(line_no, "key outside of a [scenario <id>] section");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(line_no, "empty key");
    blocks.back().entries.push_back(Entry{std::string(key), std::string(trim(line.substr(eq + 1))), line_no});
  }

  std::vector<Scenario> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) out.push_back(BlockReader(b).read());
  return out;
}

std::vector<Scenario> parse_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenarios(ss.str());
}

namespace {

constexpr std::string_view kGallery = R"(# Bundled scenario gallery.
# Fields are trigonometric polynomials: <name>.term = <k_1> .. <k_d> : <cos> <sin>
# contributes cos * cos(2 pi k.x) + sin * sin(2 pi k.x). Squared fields are
# q(x)^2 + offset with q built from the listed terms.

[scenario oned_harmonic]
family = oned
dim = 1
b.term = 0 : 2 0
b.term = 1 : 0 1
starts = 0 ; 0.3
abs_tol = 1e-3
rel_tol = 0

[scenario oned_cos2]
# b = cos^2(pi x) / pi, zero at x = 1/2
family = oned
dim = 1
b.mode = squared
b.term = 0.5 : 0.5641895835477563 0
starts = 0.1
abs_tol = 1e-3
rel_tol = 0

[scenario oned_sign_change]
family = oned
dim = 1
b.term = 0 : 0.5 0
b.term = 1 : 0 1
starts = 0 ; 0.4
abs_tol = 1e-3
rel_tol = 0

[scenario irrational_positive]
# a = 2 + sin(2 pi y_1) cos(2 pi y_2)
family = direction
dim = 2
a.term = 0 0 : 2 0
a.term = 1 1 : 0 0.5
a.term = 1 -1 : 0 0.5
xi = 1 1.4142135623730951
starts = 0 0 ; 0.1 0.7 ; 0.25 0.5 ; 0.6 0.3 ; 0.9 0.9
rel_tol = 0.01
abs_tol = 0

[scenario irrational_vanishing]
# a = cos^2(pi y_1) / pi
family = direction
dim = 2
a.mode = squared
a.term = 0.5 0 : 0.5641895835477563 0
xi = 1 1.4142135623730951
starts = 0.1 0 ; 0.3 0.6
abs_tol = 1e-2
rel_tol = 0

[scenario rational_lines]
family = direction
dim = 2
a.term = 0 0 : 2 0
a.term = 1 1 : 0 0.5
a.term = 1 -1 : 0 0.5
xi = 1 0
starts = 0 0 ; 0 0.125 ; 0 0.25
rel_tol = 0.01
abs_tol = 0

[scenario rational_vanishing]
family = direction
dim = 2
a.mode = squared
a.term = 0.5 0 : 0.5641895835477563 0
xi = 1 0
starts = 0.1 0 ; 0.2 0.5
abs_tol = 1e-3
rel_tol = 0

[scenario rectified]
family = rectified
dim = 2
a.term = 0 0 : 2 0
a.term = 1 0 : 0 1
xi = 1 0
phi.lattice = 1 1 ; 0 1
phi.periodic.1.term = 0 1 : 0 0.05
phi.periodic.2.term = 1 0 : 0 0.05
starts = 0 0 ; 0.3 0.2 ; 0.5 0.75
rel_tol = 0.01
abs_tol = 0

[scenario current]
# A = I + 0.1 I, v = cos(2 pi x_1) cos(2 pi x_2) / (2 pi)
family = current
dim = 2
A.ridge = 0.1
A.factor.1.1.term = 0 0 : 1 0
A.factor.2.2.term = 0 0 : 1 0
v.term = 1 1 : 0.07957747154594767 0
v.term = 1 -1 : 0.07957747154594767 0
starts = 0.1 0.05 ; -0.2 0.1 ; 0.15 -0.2
t_end = 1000
abs_tol = 1e-6
rel_tol = 0

[scenario diagonal_rational]
family = direction
dim = 2
a.term = 0 0 : 2 0
a.term = 1 1 : 0 0.5
a.term = 1 -1 : 0 0.5
xi = 1 1
starts = 0 0 ; 0.2 0 ; 0.1 0.35
rel_tol = 0.01
abs_tol = 0
)";

}  // namespace

std::string_view gallery_text() { return kGallery; }

}  // namespace torusflow
