#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "cakg/decimal.hpp"
#include "cakg/result.hpp"

namespace cakg {

struct Iri {
  std::string value;

  auto operator<=>(const Iri&) const = default;
};

// A typed or language-tagged literal. `language` is non-empty exactly when
// datatype is rdf:langString.
struct Literal {
  std::string lexical;
  Iri datatype;
  std::string language;

  auto operator<=>(const Literal&) const = default;
};

using Term = std::variant<Iri, Literal>;

inline bool is_iri(const Term& t) { return t.index() == 0; }
inline bool is_literal(const Term& t) { return t.index() == 1; }
inline const Iri& as_iri(const Term& t) { return std::get<Iri>(t); }
inline const Literal& as_literal(const Term& t) { return std::get<Literal>(t); }

inline bool term_less(const Term& a, const Term& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  if (is_iri(a)) return as_iri(a) < as_iri(b);
  return as_literal(a) < as_literal(b);
}

// Subjects and predicates are always IRIs; generated data never uses blank
// nodes, so plain set equality is graph equality.
struct Triple {
  Iri subject;
  Iri predicate;
  Term object;

  bool operator==(const Triple&) const = default;
  bool operator<(const Triple& o) const {
    if (subject != o.subject) return subject < o.subject;
    if (predicate != o.predicate) return predicate < o.predicate;
    return term_less(object, o.object);
  }
};

namespace vocab {

inline constexpr std::string_view kRdfNs =
    "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view kRdfsNs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view kXsdNs = "http://www.w3.org/2001/XMLSchema#";

inline const Iri& rdf_type() {
  static const Iri v{std::string(kRdfNs) + "type"};
  return v;
}
inline const Iri& rdf_lang_string() {
  static const Iri v{std::string(kRdfNs) + "langString"};
  return v;
}
inline const Iri& rdfs_label() {
  static const Iri v{std::string(kRdfsNs) + "label"};
  return v;
}
inline const Iri& rdfs_subclass_of() {
  static const Iri v{std::string(kRdfsNs) + "subClassOf"};
  return v;
}
inline const Iri& xsd_string() {
  static const Iri v{std::string(kXsdNs) + "string"};
  return v;
}
inline const Iri& xsd_decimal() {
  static const Iri v{std::string(kXsdNs) + "decimal"};
  return v;
}
inline const Iri& xsd_integer() {
  static const Iri v{std::string(kXsdNs) + "integer"};
  return v;
}
inline const Iri& xsd_date() {
  static const Iri v{std::string(kXsdNs) + "date"};
  return v;
}

}  // namespace vocab

// ---------------------------------------------------------------------------
// Calendar dates (xsd:date subset, YYYY-MM-DD)

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  auto operator<=>(const Date&) const = default;
};

inline bool is_leap_year(int y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int days_in_month(int y, int m) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m < 1 || m > 12) return 0;
  if (m == 2 && is_leap_year(y)) return 29;
  return kDays[m - 1];
}

inline std::optional<Date> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto num = [&](int from, int len) -> int {
    int v = 0;
    for (int i = from; i < from + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return -1;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  Date d{num(0, 4), num(5, 2), num(8, 2)};
  if (d.year < 0 || d.month < 1 || d.month > 12) return std::nullopt;
  if (d.day < 1 || d.day > days_in_month(d.year, d.month)) return std::nullopt;
  return d;
}

inline std::string format_date(const Date& d) {
  char buf[11];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Validation and construction

// Pragmatic Turtle IRIREF check: absolute IRI, none of the characters the
// IRIREF production excludes (controls, space, <>"{}|^` and backslash).
// Reported positions are 1-based.
inline Result<Iri> validate_iri(std::string_view candidate) {
  if (candidate.empty())
    return Error{Errc::empty_iri, "IRI must not be empty"};
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(candidate[i]);
    if (c <= 0x20 || c == '<' || c == '>' || c == '"' || c == '{' ||
        c == '}' || c == '|' || c == '^' || c == '`' || c == '\\') {
      Error e{Errc::illegal_character,
              "character not allowed in IRI at position " + std::to_string(i + 1)};
      e.position = i + 1;
      return e;
    }
  }
  auto colon = candidate.find(':');
  bool has_scheme = colon != std::string_view::npos && colon > 0;
  if (has_scheme) {
    std::string_view scheme = candidate.substr(0, colon);
    if (!(scheme[0] >= 'A' && scheme[0] <= 'Z') &&
        !(scheme[0] >= 'a' && scheme[0] <= 'z'))
      has_scheme = false;
    for (std::size_t i = 1; has_scheme && i < scheme.size(); ++i) {
      char c = scheme[i];
      bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                (c >= '0' && c <= '9') || c == '+' || c == '.' || c == '-';
      if (!ok) has_scheme = false;
    }
  }
  if (!has_scheme)
    return Error{Errc::missing_scheme,
                 "IRI is not absolute (no scheme prefix): '" +
                     std::string(candidate) + "'"};
  return Iri{std::string(candidate)};
}

// Validates the lexical form for the recognized xsd types; anything else
// passes through unchecked.
inline Result<Literal> make_typed_literal(std::string lexical, Iri datatype) {
  if (datatype == vocab::xsd_decimal()) {
    if (!is_decimal_lexical(lexical))
      return Error{Errc::lexical_form_invalid,
                   "'" + lexical + "' is not a valid xsd:decimal"};
  } else if (datatype == vocab::xsd_integer()) {
    if (!is_integer_lexical(lexical))
      return Error{Errc::lexical_form_invalid,
                   "'" + lexical + "' is not a valid xsd:integer"};
  } else if (datatype == vocab::xsd_date()) {
    if (!parse_date(lexical))
      return Error{Errc::lexical_form_invalid,
                   "'" + lexical + "' is not a valid xsd:date"};
  } else if (datatype == vocab::rdf_lang_string()) {
    return Error{Errc::lexical_form_invalid,
                 "rdf:langString literals require a language tag"};
  }
  return Literal{std::move(lexical), std::move(datatype), ""};
}

inline Result<Literal> make_lang_literal(std::string lexical, std::string tag) {
  if (tag.empty())
    return Error{Errc::lexical_form_invalid, "language tag must not be empty"};
  bool start = true;
  for (char c : tag) {
    bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
              (!start && ((c >= '0' && c <= '9') || c == '-'));
    if (!ok)
      return Error{Errc::lexical_form_invalid,
                   "language tag '" + tag + "' is not ASCII BCP-47"};
    start = false;
  }
  return Literal{std::move(lexical), vocab::rdf_lang_string(), std::move(tag)};
}

inline Literal string_literal(std::string lexical) {
  return Literal{std::move(lexical), vocab::xsd_string(), ""};
}

inline Literal decimal_literal(std::string lexical) {
  return Literal{std::move(lexical), vocab::xsd_decimal(), ""};
}

inline Literal date_literal(const Date& d) {
  return Literal{format_date(d), vocab::xsd_date(), ""};
}

// ---------------------------------------------------------------------------
// Prefixes

// Ordered prefix-label -> namespace map. Labels are unique and follow the
// ASCII core of the Turtle PNAME_NS grammar (empty label allowed).
class PrefixMap {
 public:
  static bool valid_label(std::string_view label) {
    if (label.empty()) return true;
    char c0 = label.front();
    if (!((c0 >= 'A' && c0 <= 'Z') || (c0 >= 'a' && c0 <= 'z'))) return false;
    for (char c : label.substr(1)) {
      bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                (c >= '0' && c <= '9') || c == '_' || c == '-';
      if (!ok) return false;
    }
    return true;
  }

  Status add(std::string label, Iri ns) {
    if (!valid_label(label))
      return Error{Errc::syntax_error, "invalid prefix label '" + label + "'"};
    if (find(label))
      return Error{Errc::syntax_error, "duplicate prefix label '" + label + "'"};
    entries_.emplace_back(std::move(label), std::move(ns));
    return ok_status();
  }

  const Iri* find(std::string_view label) const {
    for (const auto& [l, ns] : entries_)
      if (l == label) return &ns;
    return nullptr;
  }

  const std::vector<std::pair<std::string, Iri>>& entries() const {
    return entries_;
  }

  bool operator==(const PrefixMap&) const = default;

 private:
  std::vector<std::pair<std::string, Iri>> entries_;
};

inline Result<Iri> expand_pname(std::string_view prefixed, const PrefixMap& prefixes) {
  auto colon = prefixed.find(':');
  if (colon == std::string_view::npos)
    return Error{Errc::syntax_error,
                 "prefixed name '" + std::string(prefixed) + "' lacks ':'"};
  std::string label(prefixed.substr(0, colon));
  std::string_view local = prefixed.substr(colon + 1);
  const Iri* ns = prefixes.find(label);
  if (!ns)
    return Error{Errc::unknown_prefix, "unknown prefix '" + label + "'"};
  return validate_iri(ns->value + std::string(local));
}

}  // namespace cakg
