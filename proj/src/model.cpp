#include "pmrf/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "pmrf/errors.hpp"

namespace pmrf {

Clause::Clause(std::vector<Literal> literals) : literals_(std::move(literals)) {
  std::sort(literals_.begin(), literals_.end());
  literals_.erase(std::unique(literals_.begin(), literals_.end()), literals_.end());
  for (std::size_t i = 1; i < literals_.size(); ++i) {
    if (literals_[i].var() == literals_[i - 1].var()) {
      throw std::invalid_argument("clause contains variable " + std::to_string(literals_[i].var()) +
                                  " and its negation");
    }
  }
  for (const Literal& lit : literals_) {
    if (lit.var() < 1) throw std::invalid_argument("literal variable index must be >= 1");
  }
}

Clause::Clause(std::initializer_list<int> dimacs) : Clause([&] {
  std::vector<Literal> lits;
  for (int v : dimacs) lits.push_back(Literal::from_int(v));
  return lits;
}()) {}

bool Clause::contains(Literal lit) const {
  return std::binary_search(literals_.begin(), literals_.end(), lit);
}

bool Clause::subset_of(const Clause& other) const {
  return std::includes(other.literals_.begin(), other.literals_.end(), literals_.begin(), literals_.end());
}

bool Assignment::is_total() const {
  return std::none_of(values_.begin() + 1, values_.end(),
                      [](TruthValue v) { return v == TruthValue::Unassigned; });
}

int Assignment::count_assigned() const {
  return static_cast<int>(std::count_if(values_.begin() + 1, values_.end(),
                                        [](TruthValue v) { return v != TruthValue::Unassigned; }));
}

Assignment Assignment::from_bits(int num_vars, std::uint64_t bits) {
  Assignment a(num_vars);
  for (int v = 1; v <= num_vars; ++v) a.set(v, ((bits >> (v - 1)) & 1U) != 0);
  return a;
}

ClauseStatus clause_status(const Clause& c, const Assignment& a) {
  bool open = false;
  for (const Literal& lit : c) {
    switch (a.value(lit)) {
      case TruthValue::True: return ClauseStatus::Satisfied;
      case TruthValue::Unassigned: open = true; break;
      case TruthValue::False: break;
    }
  }
  return open ? ClauseStatus::Undetermined : ClauseStatus::Falsified;
}

namespace {

void check_range(const Clause& c, int num_vars) {
  if (c.max_var() > num_vars) {
    throw std::out_of_range("clause mentions variable " + std::to_string(c.max_var()) +
                            " but the model has " + std::to_string(num_vars));
  }
}

}  // namespace

PropMRF::PropMRF(int num_vars, std::vector<Clause> hard, std::vector<SoftClause> soft)
    : num_vars_(num_vars), hard_(std::move(hard)), soft_(std::move(soft)) {
  if (num_vars_ < 0) throw std::invalid_argument("negative variable count");
  for (const Clause& c : hard_) check_range(c, num_vars_);
  for (const SoftClause& s : soft_) {
    check_range(s.clause, num_vars_);
    if (!std::isfinite(s.weight)) throw std::invalid_argument("soft clause weight must be finite");
  }
}

PropMRF conjoin_query(const PropMRF& m, std::span<const Clause> query) {
  std::vector<Clause> hard = m.hard();
  hard.insert(hard.end(), query.begin(), query.end());
  return PropMRF(m.num_vars(), std::move(hard), m.soft());
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view tok, T& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if constexpr (std::is_integral_v<T>) {
    if (first != last && *first == '+') ++first;
  }
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool is_comment(const std::vector<std::string_view>& toks) {
  return toks.empty() || toks[0][0] == '#' || toks[0][0] == 'c';
}

// Reads `<lit>... 0` starting at toks[first]; nothing may follow the 0.
Clause parse_literals(const std::vector<std::string_view>& toks, std::size_t first, int num_vars,
                      std::size_t line_no) {
  using Kind = ParseError::Kind;
  std::vector<Literal> lits;
  bool terminated = false;
  for (std::size_t i = first; i < toks.size(); ++i) {
    int lit = 0;
    if (!parse_number(toks[i], lit)) {
      throw ParseError(Kind::Malformed, line_no, "bad literal '" + std::string(toks[i]) + "'");
    }
    if (lit == 0) {
      if (i + 1 != toks.size()) throw ParseError(Kind::Malformed, line_no, "tokens after terminating 0");
      terminated = true;
      break;
    }
    int var = lit < 0 ? -lit : lit;
    if (var > num_vars) {
      throw ParseError(Kind::IndexOutOfRange, line_no,
                       "variable " + std::to_string(var) + " exceeds " + std::to_string(num_vars));
    }
    lits.push_back(Literal::from_int(lit));
  }
  if (!terminated) throw ParseError(Kind::Malformed, line_no, "clause not terminated by 0");
  try {
    return Clause(std::move(lits));
  } catch (const std::invalid_argument& e) {
    throw ParseError(Kind::Tautology, line_no, e.what());
  }
}

}  // namespace

PropMRF parse_model(std::istream& in) {
  using Kind = ParseError::Kind;
  std::string line;
  std::size_t line_no = 0;
  int num_vars = -1;
  std::vector<Clause> hard;
  std::vector<SoftClause> soft;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = split(line);
    if (is_comment(toks)) continue;
    if (toks[0] == "p") {
      if (num_vars >= 0) throw ParseError(Kind::Malformed, line_no, "duplicate header");
      if (toks.size() != 3 || toks[1] != "pmrf" || !parse_number(toks[2], num_vars) || num_vars < 0) {
        throw ParseError(Kind::Malformed, line_no, "expected 'p pmrf <num_vars>'");
      }
      continue;
    }
    if (num_vars < 0) throw ParseError(Kind::Malformed, line_no, "clause before 'p pmrf' header");
    if (toks[0] == "h") {
      hard.push_back(parse_literals(toks, 1, num_vars, line_no));
    } else if (toks[0] == "s") {
      double w = 0.0;
      if (toks.size() < 2 || !parse_number(toks[1], w) || !std::isfinite(w)) {
        throw ParseError(Kind::Malformed, line_no, "expected finite weight after 's'");
      }
      soft.push_back({parse_literals(toks, 2, num_vars, line_no), w});
    } else {
      throw ParseError(Kind::Malformed, line_no, "unknown line type '" + std::string(toks[0]) + "'");
    }
  }
  if (num_vars < 0) throw ParseError(Kind::Malformed, line_no, "missing 'p pmrf' header");
  return PropMRF(num_vars, std::move(hard), std::move(soft));
}

PropMRF parse_model(const std::string& text) {
  std::istringstream in(text);
  return parse_model(in);
}

namespace {

void write_literals(std::ostream& out, const Clause& c) {
  for (const Literal& lit : c) out << ' ' << lit.to_int();
  out << " 0\n";
}

std::string format_weight(double w) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, w);
  return std::string(buf, ptr);
}

}  // namespace

void write_model(std::ostream& out, const PropMRF& m) {
  out << "p pmrf " << m.num_vars() << '\n';
  for (const Clause& c : m.hard()) {
    out << 'h';
    write_literals(out, c);
  }
  for (const SoftClause& s : m.soft()) {
    out << "s " << format_weight(s.weight);
    write_literals(out, s.clause);
  }
}

std::string to_string(const PropMRF& m) {
  std::ostringstream out;
  write_model(out, m);
  return out.str();
}

std::vector<Clause> parse_query(std::istream& in, int num_vars) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<Clause> out;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = split(line);
    if (is_comment(toks)) continue;
    out.push_back(parse_literals(toks, 0, num_vars, line_no));
  }
  return out;
}

std::vector<Clause> parse_query(const std::string& text, int num_vars) {
  std::istringstream in(text);
  return parse_query(in, num_vars);
}

std::string fingerprint(const PropMRF& m) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : to_string(m)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = kHex[h & 0xF];
  return s;
}

}  // namespace pmrf
