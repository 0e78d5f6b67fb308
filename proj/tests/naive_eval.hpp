#pragma once

// Reference SPARQL evaluator for the randomized equivalence tests.  Kept
// deliberately independent of the engine: joins are plain cartesian scans in
// textual pattern order, and numeric comparison goes through arbitrary
// precision cross multiplication instead of digit alignment.

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cakg/rdf.hpp"
#include "cakg/sparql.hpp"
#include "cakg/store.hpp"

namespace cakg::naive {

using Solution = std::map<std::string, Term>;
using boost::multiprecision::cpp_int;

// Scaled integer view of a decimal lexical: value = digits / 10^frac_len.
struct ScaledInt {
  cpp_int digits;
  int frac_len = 0;
};

inline ScaledInt decode_decimal(std::string_view s) {
  ScaledInt out;
  bool neg = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  for (char c : s) {
    if (c == '.') continue;
    out.digits = out.digits * 10 + (c - '0');
  }
  auto dot = s.find('.');
  out.frac_len = dot == std::string_view::npos
                     ? 0
                     : static_cast<int>(s.size() - dot - 1);
  if (neg) out.digits = -out.digits;
  return out;
}

inline int compare_numeric(std::string_view a, std::string_view b) {
  ScaledInt x = decode_decimal(a);
  ScaledInt y = decode_decimal(b);
  cpp_int lhs = x.digits;
  cpp_int rhs = y.digits;
  for (int i = 0; i < y.frac_len; ++i) lhs *= 10;
  for (int i = 0; i < x.frac_len; ++i) rhs *= 10;
  if (lhs < rhs) return -1;
  return lhs == rhs ? 0 : 1;
}

enum class Kind { iri = 0, numeric = 1, date = 2, string = 3 };

inline Kind kind_of(const Term& t) {
  if (is_iri(t)) return Kind::iri;
  const Literal& l = as_literal(t);
  if (l.datatype == vocab::xsd_decimal() || l.datatype == vocab::xsd_integer())
    return Kind::numeric;
  if (l.datatype == vocab::xsd_date()) return Kind::date;
  return Kind::string;
}

// nullopt when the kinds differ (FILTER comparisons treat that as false).
inline std::optional<int> compare_same_kind(const Term& a, const Term& b) {
  Kind ka = kind_of(a);
  Kind kb = kind_of(b);
  if (ka != kb) return std::nullopt;
  auto c3 = [](const std::string& x, const std::string& y) {
    return x < y ? -1 : (x == y ? 0 : 1);
  };
  switch (ka) {
    case Kind::iri:
      return c3(as_iri(a).value, as_iri(b).value);
    case Kind::numeric:
      return compare_numeric(as_literal(a).lexical, as_literal(b).lexical);
    case Kind::date:
      return c3(as_literal(a).lexical, as_literal(b).lexical);
    case Kind::string: {
      int c = c3(as_literal(a).lexical, as_literal(b).lexical);
      if (c == 0) c = c3(as_literal(a).datatype.value, as_literal(b).datatype.value);
      if (c == 0) c = c3(as_literal(a).language, as_literal(b).language);
      return c;
    }
  }
  return 0;
}

inline bool eval_filter(const sparql::FilterExpr& e, const Solution& sol) {
  using Kind = sparql::FilterExpr::Kind;
  switch (e.kind) {
    case Kind::comparison: {
      auto resolve = [&](const sparql::FilterOperand& o) -> std::optional<Term> {
        if (std::holds_alternative<Term>(o)) return std::get<Term>(o);
        auto it = sol.find(std::get<store::Var>(o).name);
        if (it == sol.end()) return std::nullopt;
        return it->second;
      };
      auto a = resolve(e.lhs);
      auto b = resolve(e.rhs);
      if (!a || !b) return false;
      auto cmp = compare_same_kind(*a, *b);
      if (!cmp) return false;
      switch (e.op) {
        case sparql::Comparator::lt: return *cmp < 0;
        case sparql::Comparator::le: return *cmp <= 0;
        case sparql::Comparator::eq: return *cmp == 0;
        case sparql::Comparator::ne: return *cmp != 0;
        case sparql::Comparator::ge: return *cmp >= 0;
        case sparql::Comparator::gt: return *cmp > 0;
      }
      return false;
    }
    case Kind::logical_and:
      return eval_filter(*e.left, sol) && eval_filter(*e.right, sol);
    case Kind::logical_or:
      return eval_filter(*e.left, sol) || eval_filter(*e.right, sol);
    case Kind::logical_not:
      return !eval_filter(*e.left, sol);
  }
  return false;
}

// Cartesian join in textual order.  Returns nullopt when the intermediate
// solution count exceeds `cap` so callers can skip infeasible cases.
inline std::optional<std::vector<Solution>> solutions(
    const std::set<Triple>& graph, const sparql::Query& q, std::size_t cap) {
  std::vector<Solution> sols{Solution{}};
  for (const store::TriplePattern& p : q.where) {
    std::vector<Solution> next;
    const store::PatternTerm* parts[3] = {&p.subject, &p.predicate, &p.object};
    for (const Solution& sol : sols) {
      for (const Triple& t : graph) {
        const Term values[3] = {Term{t.subject}, Term{t.predicate}, t.object};
        bool ok = true;
        const std::string* names[3] = {nullptr, nullptr, nullptr};
        for (int k = 0; k < 3 && ok; ++k) {
          if (store::is_bound(*parts[k]))
            ok = store::bound_term(*parts[k]) == values[k];
          else
            names[k] = &store::pattern_var(*parts[k]).name;
        }
        for (int k = 0; k < 3 && ok; ++k) {
          if (!names[k]) continue;
          auto it = sol.find(*names[k]);
          if (it != sol.end()) ok = it->second == values[k];
        }
        for (int k = 0; k < 3 && ok; ++k)
          for (int j = k + 1; j < 3 && ok; ++j)
            if (names[k] && names[j] && *names[k] == *names[j])
              ok = values[k] == values[j];
        if (!ok) continue;
        Solution candidate = sol;
        for (int k = 0; k < 3; ++k)
          if (names[k]) candidate.emplace(*names[k], values[k]);
        next.push_back(std::move(candidate));
        if (next.size() > cap) return std::nullopt;
      }
    }
    sols = std::move(next);
  }
  std::vector<Solution> kept;
  for (const Solution& sol : sols) {
    bool pass = true;
    for (const sparql::FilterPtr& f : q.filters)
      if (!eval_filter(*f, sol)) {
        pass = false;
        break;
      }
    if (pass) kept.push_back(sol);
  }
  return kept;
}

inline std::vector<sparql::BindingTable::Row> project(
    const std::vector<Solution>& sols, const std::vector<std::string>& vars,
    bool distinct) {
  std::vector<sparql::BindingTable::Row> rows;
  for (const Solution& sol : sols) {
    sparql::BindingTable::Row row;
    for (const std::string& v : vars) {
      auto it = sol.find(v);
      if (it == sol.end())
        row.push_back(std::nullopt);
      else
        row.push_back(it->second);
    }
    rows.push_back(std::move(row));
  }
  if (distinct) {
    std::set<sparql::BindingTable::Row, sparql::detail::RowLess> seen;
    std::vector<sparql::BindingTable::Row> unique;
    for (auto& r : rows)
      if (seen.insert(r).second) unique.push_back(std::move(r));
    rows = std::move(unique);
  }
  return rows;
}

}  // namespace cakg::naive
