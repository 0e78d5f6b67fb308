#pragma once

#include <random>
#include <set>
#include <string>
#include <vector>

#include "cakg/rdf.hpp"
#include "cakg/store.hpp"

namespace cakg::testutil {

// Small closed universes so random graphs and patterns actually join.
inline std::vector<Iri> subject_pool() {
  std::vector<Iri> out;
  for (int i = 0; i < 12; ++i)
    out.push_back(Iri{"http://t.example/node/n" + std::to_string(i)});
  return out;
}

inline std::vector<Iri> predicate_pool() {
  std::vector<Iri> out;
  for (int i = 0; i < 6; ++i)
    out.push_back(Iri{"http://t.example/p/p" + std::to_string(i)});
  out.push_back(vocab::rdf_type());
  return out;
}

inline std::vector<Term> object_pool() {
  std::vector<Term> out;
  for (const Iri& s : subject_pool()) out.push_back(s);
  for (int i = 0; i < 8; ++i)
    out.push_back(decimal_literal(std::to_string(i) + "." + std::to_string(i * 3 % 10)));
  for (int i = 0; i < 4; ++i)
    out.push_back(string_literal("label" + std::to_string(i)));
  for (int d = 1; d <= 5; ++d)
    out.push_back(Literal{"1951-01-0" + std::to_string(d), vocab::xsd_date(), ""});
  out.push_back(Iri{"http://t.example/class/Station"});
  return out;
}

inline Triple random_triple(std::mt19937& rng) {
  static const auto subjects = subject_pool();
  static const auto predicates = predicate_pool();
  static const auto objects = object_pool();
  std::uniform_int_distribution<std::size_t> s(0, subjects.size() - 1);
  std::uniform_int_distribution<std::size_t> p(0, predicates.size() - 1);
  std::uniform_int_distribution<std::size_t> o(0, objects.size() - 1);
  return Triple{subjects[s(rng)], predicates[p(rng)], objects[o(rng)]};
}

inline std::set<Triple> random_graph(std::mt19937& rng, std::size_t max_size) {
  std::uniform_int_distribution<std::size_t> n(0, max_size);
  std::set<Triple> g;
  std::size_t want = n(rng);
  while (g.size() < want) g.insert(random_triple(rng));
  return g;
}

// Pattern positions are drawn bound (from the pools) or variable, reusing a
// small variable alphabet so joins and repeated variables occur.
inline store::TriplePattern random_pattern(std::mt19937& rng) {
  static const auto subjects = subject_pool();
  static const auto predicates = predicate_pool();
  static const auto objects = object_pool();
  static const std::vector<std::string> vars{"a", "b", "c", "d"};
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<std::size_t> v(0, vars.size() - 1);
  auto pick = [&](const auto& pool) {
    std::uniform_int_distribution<std::size_t> d(0, pool.size() - 1);
    return pool[d(rng)];
  };
  store::PatternTerm s = coin(rng) ? store::PatternTerm(store::Var{vars[v(rng)]})
                                   : store::PatternTerm(Term(pick(subjects)));
  store::PatternTerm p = coin(rng) ? store::PatternTerm(store::Var{vars[v(rng)]})
                                   : store::PatternTerm(Term(pick(predicates)));
  store::PatternTerm o = coin(rng) ? store::PatternTerm(store::Var{vars[v(rng)]})
                                   : store::PatternTerm(Term(pick(objects)));
  return store::TriplePattern{std::move(s), std::move(p), std::move(o)};
}

// Reference implementation: full scan + bound/repeated-variable filter.
inline std::vector<Triple> naive_match(const std::set<Triple>& graph,
                                       const store::TriplePattern& p) {
  auto var_name = [](const store::PatternTerm& t) -> const std::string* {
    return store::is_bound(t) ? nullptr : &store::pattern_var(t).name;
  };
  const std::string* vs = var_name(p.subject);
  const std::string* vp = var_name(p.predicate);
  const std::string* vo = var_name(p.object);
  std::vector<Triple> out;
  for (const Triple& t : graph) {
    if (store::is_bound(p.subject) &&
        Term(t.subject) != store::bound_term(p.subject))
      continue;
    if (store::is_bound(p.predicate) &&
        Term(t.predicate) != store::bound_term(p.predicate))
      continue;
    if (store::is_bound(p.object) && t.object != store::bound_term(p.object))
      continue;
    if (vs && vp && *vs == *vp && Term(t.subject) != Term(t.predicate)) continue;
    if (vs && vo && *vs == *vo && Term(t.subject) != t.object) continue;
    if (vp && vo && *vp == *vo && Term(t.predicate) != t.object) continue;
    out.push_back(t);
  }
  return out;
}

}  // namespace cakg::testutil
