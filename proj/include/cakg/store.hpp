#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "cakg/ingest.hpp"
#include "cakg/rdf.hpp"
#include "cakg/result.hpp"

namespace cakg::store {

using TermId = std::uint64_t;

struct Var {
  std::string name;

  auto operator<=>(const Var&) const = default;
};

// Bound term or named variable, one per triple position.
using PatternTerm = std::variant<Term, Var>;

struct TriplePattern {
  PatternTerm subject;
  PatternTerm predicate;
  PatternTerm object;

  bool operator==(const TriplePattern&) const = default;
};

inline bool is_bound(const PatternTerm& p) { return p.index() == 0; }
inline const Term& bound_term(const PatternTerm& p) { return std::get<Term>(p); }
inline const Var& pattern_var(const PatternTerm& p) { return std::get<Var>(p); }

inline TriplePattern pattern(PatternTerm s, PatternTerm p, PatternTerm o) {
  return TriplePattern{std::move(s), std::move(p), std::move(o)};
}

struct InsertReport {
  std::size_t added = 0;
  std::size_t duplicates = 0;
};

namespace detail {

using Encoded = std::array<TermId, 3>;  // always stored as (s, p, o)

struct TermLess {
  bool operator()(const Term& a, const Term& b) const { return term_less(a, b); }
};

// Immutable store state; readers share it, writers publish a new one.
struct State {
  std::vector<Term> terms;                 // id -> term
  std::map<Term, TermId, TermLess> ids;    // term -> id
  std::vector<Encoded> spo, pos, osp;      // three sorted orderings

  std::optional<TermId> find(const Term& t) const {
    auto it = ids.find(t);
    if (it == ids.end()) return std::nullopt;
    return it->second;
  }

  TermId intern(const Term& t) {
    auto it = ids.find(t);
    if (it != ids.end()) return it->second;
    TermId id = terms.size();
    terms.push_back(t);
    ids.emplace(t, id);
    return id;
  }
};

inline Encoded rotate(const Encoded& spo_key, int which) {
  switch (which) {
    case 1: return {spo_key[1], spo_key[2], spo_key[0]};  // POS
    case 2: return {spo_key[2], spo_key[0], spo_key[1]};  // OSP
    default: return spo_key;
  }
}

inline Encoded unrotate(const Encoded& key, int which) {
  switch (which) {
    case 1: return {key[2], key[0], key[1]};
    case 2: return {key[1], key[2], key[0]};
    default: return key;
  }
}

inline std::uint32_t crc32(const unsigned char* data, std::size_t n,
                           std::uint32_t seed = 0) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t c = seed ^ 0xFFFFFFFFu;
  for (std::size_t i = 0; i < n; ++i) c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

}  // namespace detail

// A consistent point-in-time view of the store. All query paths run against
// one view, so concurrent writers never tear a result.
class ReadView {
 public:
  explicit ReadView(std::shared_ptr<const detail::State> state)
      : state_(std::move(state)) {}

  std::size_t size() const { return state_->spo.size(); }
  std::size_t dictionary_size() const { return state_->terms.size(); }

  const Term* term_of(TermId id) const {
    if (id >= state_->terms.size()) return nullptr;
    return &state_->terms[id];
  }
  std::optional<TermId> id_of(const Term& t) const { return state_->find(t); }

  std::vector<Triple> match(const TriplePattern& p) const {
    std::vector<Triple> out;
    scan(p, [&](const detail::Encoded& spo_key) {
      out.push_back(decode(spo_key));
    });
    return out;
  }

  std::size_t match_count(const TriplePattern& p) const {
    std::size_t n = 0;
    scan(p, [&](const detail::Encoded&) { ++n; });
    return n;
  }

  std::set<Triple> dump() const {
    std::set<Triple> out;
    for (const auto& e : state_->spo) out.insert(decode(e));
    return out;
  }

  // Exposed for index-agreement tests: full scan through one ordering.
  std::set<Triple> dump_via(int which) const {
    std::set<Triple> out;
    const auto& idx = which == 1   ? state_->pos
                      : which == 2 ? state_->osp
                                   : state_->spo;
    for (const auto& e : idx) out.insert(decode(detail::unrotate(e, which)));
    return out;
  }

  const std::shared_ptr<const detail::State>& state() const { return state_; }

 private:
  Triple decode(const detail::Encoded& e) const {
    return Triple{as_iri(state_->terms[e[0]]), as_iri(state_->terms[e[1]]),
                  state_->terms[e[2]]};
  }

  template <typename Fn>
  void scan(const TriplePattern& p, Fn&& fn) const {
    std::optional<TermId> s, pr, o;
    if (is_bound(p.subject)) {
      s = state_->find(bound_term(p.subject));
      if (!s) return;
    }
    if (is_bound(p.predicate)) {
      pr = state_->find(bound_term(p.predicate));
      if (!pr) return;
    }
    if (is_bound(p.object)) {
      o = state_->find(bound_term(p.object));
      if (!o) return;
    }

    // repeated variables constrain positions pairwise
    auto var_of = [](const PatternTerm& t) -> const std::string* {
      return is_bound(t) ? nullptr : &pattern_var(t).name;
    };
    const std::string* vs = var_of(p.subject);
    const std::string* vp = var_of(p.predicate);
    const std::string* vo = var_of(p.object);
    bool sp = vs && vp && *vs == *vp;
    bool so = vs && vo && *vs == *vo;
    bool po = vp && vo && *vp == *vo;

    // index dispatch: the ordering whose sort prefix covers the bound set
    // S* -> SPO, P/PO -> POS, O/OS -> OSP, unbound -> SPO
    int which;
    std::array<std::optional<TermId>, 3> prefix{};
    if (s && pr) {
      which = 0;
      prefix = {s, pr, o};
    } else if (s && o) {
      which = 2;
      prefix = {o, s, std::nullopt};
    } else if (s) {
      which = 0;
      prefix = {s, std::nullopt, std::nullopt};
    } else if (pr) {
      which = 1;
      prefix = {pr, o, std::nullopt};
    } else if (o) {
      which = 2;
      prefix = {o, std::nullopt, std::nullopt};
    } else {
      which = 0;
      prefix = {std::nullopt, std::nullopt, std::nullopt};
    }

    const auto& idx = which == 1   ? state_->pos
                      : which == 2 ? state_->osp
                                   : state_->spo;
    detail::Encoded lo{0, 0, 0};
    detail::Encoded hi{UINT64_MAX, UINT64_MAX, UINT64_MAX};
    for (int i = 0; i < 3 && prefix[i]; ++i) lo[i] = hi[i] = *prefix[i];
    auto begin = std::lower_bound(idx.begin(), idx.end(), lo);
    auto end = std::upper_bound(begin, idx.end(), hi);
    for (auto it = begin; it != end; ++it) {
      detail::Encoded spo_key = detail::unrotate(*it, which);
      if (sp && spo_key[0] != spo_key[1]) continue;
      if (so && spo_key[0] != spo_key[2]) continue;
      if (po && spo_key[1] != spo_key[2]) continue;
      fn(spo_key);
    }
  }

  std::shared_ptr<const detail::State> state_;
};

class TripleStore {
 public:
  TripleStore() : state_(std::make_shared<detail::State>()) {}

  ReadView read() const {
    std::lock_guard<std::mutex> lock(state_mu_);
    return ReadView(state_);
  }

  std::size_t size() const { return read().size(); }
  std::vector<Triple> match(const TriplePattern& p) const {
    return read().match(p);
  }
  std::size_t match_count(const TriplePattern& p) const {
    return read().match_count(p);
  }
  std::set<Triple> dump() const { return read().dump(); }

  template <typename Range>
  InsertReport insert(const Range& triples) {
    std::lock_guard<std::mutex> write(write_mu_);
    auto next = std::make_shared<detail::State>(*current());
    InsertReport report = insert_into(*next, triples);
    if (report.added > 0) publish(std::move(next));
    return report;
  }

  // PUT semantics: rebuilds the store (and its dictionary) from scratch.
  template <typename Range>
  void replace(const Range& triples) {
    std::lock_guard<std::mutex> write(write_mu_);
    auto next = std::make_shared<detail::State>();
    insert_into(*next, triples);
    publish(std::move(next));
  }

  void clear() {
    std::lock_guard<std::mutex> write(write_mu_);
    publish(std::make_shared<detail::State>());
  }

  Status save_snapshot(const std::string& path) const {
    std::string blob = encode_snapshot(*read().state());
    return ingest::write_file(path, blob);
  }

  Status load_snapshot(const std::string& path) {
    auto blob = ingest::read_file(path);
    if (!blob.ok()) return blob.error();
    auto state = decode_snapshot(blob.value());
    if (!state.ok()) return state.error();
    std::lock_guard<std::mutex> write(write_mu_);
    publish(std::move(state).value());
    return ok_status();
  }

 private:
  std::shared_ptr<const detail::State> current() const {
    std::lock_guard<std::mutex> lock(state_mu_);
    return state_;
  }

  void publish(std::shared_ptr<detail::State> next) {
    std::lock_guard<std::mutex> lock(state_mu_);
    state_ = std::move(next);
  }

  template <typename Range>
  static InsertReport insert_into(detail::State& state, const Range& triples) {
    InsertReport report;
    std::set<detail::Encoded> fresh;
    for (const Triple& t : triples) {
      detail::Encoded key{state.intern(Term(t.subject)),
                          state.intern(Term(t.predicate)),
                          state.intern(t.object)};
      bool present =
          std::binary_search(state.spo.begin(), state.spo.end(), key) ||
          fresh.count(key);
      if (present) {
        ++report.duplicates;
      } else {
        fresh.insert(key);
        ++report.added;
      }
    }
    for (int which : {0, 1, 2}) {
      auto& idx = which == 1 ? state.pos : which == 2 ? state.osp : state.spo;
      std::size_t old_size = idx.size();
      for (const auto& key : fresh) idx.push_back(detail::rotate(key, which));
      std::sort(idx.begin() + old_size, idx.end());
      std::inplace_merge(idx.begin(), idx.begin() + old_size, idx.end());
    }
    return report;
  }

  // --- snapshot format: "CAKG" magic, version byte, length-prefixed terms,
  // encoded triples, CRC32 trailer; all integers little-endian u64.

  static void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
  }
  static void put_str(std::string& out, const std::string& s) {
    put_u64(out, s.size());
    out += s;
  }

  static std::string encode_snapshot(const detail::State& state) {
    std::string out = "CAKG";
    out += '\x01';
    put_u64(out, state.terms.size());
    for (const Term& t : state.terms) {
      if (is_iri(t)) {
        out += '\x00';
        put_str(out, as_iri(t).value);
      } else {
        const Literal& lit = as_literal(t);
        out += '\x01';
        put_str(out, lit.lexical);
        put_str(out, lit.datatype.value);
        put_str(out, lit.language);
      }
    }
    put_u64(out, state.spo.size());
    for (const auto& e : state.spo)
      for (TermId id : e) put_u64(out, id);
    std::uint32_t crc = detail::crc32(
        reinterpret_cast<const unsigned char*>(out.data()), out.size());
    for (int i = 0; i < 4; ++i) out += static_cast<char>((crc >> (8 * i)) & 0xFF);
    return out;
  }

  static Result<std::shared_ptr<detail::State>> decode_snapshot(
      const std::string& blob) {
    auto corrupt = [](std::string why) {
      return Error{Errc::corrupt_snapshot, std::move(why)};
    };
    if (blob.size() < 4 + 1 + 4 || blob.compare(0, 4, "CAKG") != 0)
      return corrupt("missing CAKG header");
    if (blob[4] != '\x01')
      return Error{Errc::version_mismatch,
                   "unsupported snapshot version " +
                       std::to_string(static_cast<int>(blob[4]))};

    std::uint32_t want = 0;
    for (int i = 0; i < 4; ++i)
      want |= static_cast<std::uint32_t>(
                  static_cast<unsigned char>(blob[blob.size() - 4 + i]))
              << (8 * i);
    std::uint32_t got = detail::crc32(
        reinterpret_cast<const unsigned char*>(blob.data()), blob.size() - 4);
    if (want != got) return corrupt("checksum mismatch");

    std::size_t pos = 5;
    std::size_t end = blob.size() - 4;
    auto get_u64 = [&](std::uint64_t& v) {
      if (pos + 8 > end) return false;
      v = 0;
      for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(
                 static_cast<unsigned char>(blob[pos + i]))
             << (8 * i);
      pos += 8;
      return true;
    };
    auto get_str = [&](std::string& s) {
      std::uint64_t n;
      if (!get_u64(n) || pos + n > end) return false;
      s.assign(blob, pos, n);
      pos += n;
      return true;
    };

    auto state = std::make_shared<detail::State>();
    std::uint64_t term_count;
    if (!get_u64(term_count)) return corrupt("truncated term table");
    for (std::uint64_t i = 0; i < term_count; ++i) {
      if (pos >= end) return corrupt("truncated term table");
      char kind = blob[pos++];
      if (kind == '\x00') {
        std::string v;
        if (!get_str(v)) return corrupt("truncated IRI entry");
        state->intern(Term(Iri{std::move(v)}));
      } else if (kind == '\x01') {
        Literal lit;
        if (!get_str(lit.lexical) || !get_str(lit.datatype.value) ||
            !get_str(lit.language))
          return corrupt("truncated literal entry");
        state->intern(Term(std::move(lit)));
      } else {
        return corrupt("unknown term kind");
      }
    }
    if (state->terms.size() != term_count)
      return corrupt("duplicate terms in dictionary");

    std::uint64_t triple_count;
    if (!get_u64(triple_count)) return corrupt("truncated triple section");
    for (std::uint64_t i = 0; i < triple_count; ++i) {
      detail::Encoded e;
      for (auto& id : e) {
        if (!get_u64(id)) return corrupt("truncated triple entry");
        if (id >= term_count) return corrupt("triple id out of range");
      }
      if (!is_iri(state->terms[e[0]]) || !is_iri(state->terms[e[1]]))
        return corrupt("subject or predicate is not an IRI");
      state->spo.push_back(e);
    }
    if (pos != end) return corrupt("trailing bytes after triple section");

    std::sort(state->spo.begin(), state->spo.end());
    state->spo.erase(std::unique(state->spo.begin(), state->spo.end()),
                     state->spo.end());
    for (int which : {1, 2}) {
      auto& idx = which == 1 ? state->pos : state->osp;
      idx.reserve(state->spo.size());
      for (const auto& e : state->spo) idx.push_back(detail::rotate(e, which));
      std::sort(idx.begin(), idx.end());
    }
    return state;
  }

  mutable std::mutex state_mu_;
  std::mutex write_mu_;
  std::shared_ptr<const detail::State> state_;
};

}  // namespace cakg::store
