#pragma once

// SPARQL subset: SELECT queries with basic graph patterns, FILTER
// comparisons, aggregates, GROUP BY, ORDER BY, LIMIT/OFFSET.  Everything
// outside that subset is rejected up front with UnsupportedFeature so
// callers never get silently wrong answers.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "cakg/decimal.hpp"
#include "cakg/rdf.hpp"
#include "cakg/result.hpp"
#include "cakg/store.hpp"
#include "cakg/turtle.hpp"
#include "json.hpp"

namespace cakg::sparql {

using store::PatternTerm;
using store::TriplePattern;
using store::Var;

// ---------------------------------------------------------------------------
// Term ordering

// Kind buckets order IRIs before numerics before dates before strings.
enum class TermKind { iri = 0, numeric = 1, date = 2, string = 3 };

inline TermKind term_kind(const Term& t) {
  if (is_iri(t)) return TermKind::iri;
  const Literal& lit = as_literal(t);
  if (lit.datatype == vocab::xsd_decimal() || lit.datatype == vocab::xsd_integer())
    return TermKind::numeric;
  if (lit.datatype == vocab::xsd_date()) return TermKind::date;
  return TermKind::string;
}

struct TermOrder {
  int cmp = 0;  // -1, 0, 1
  bool same_kind = false;
};

namespace detail {
inline int cmp3(const std::string& a, const std::string& b) {
  if (a < b) return -1;
  return a == b ? 0 : 1;
}
}  // namespace detail

// Total order used by ORDER BY.  FILTER additionally requires same_kind;
// cross-kind comparisons evaluate to false there instead of erroring.
inline TermOrder compare_terms(const Term& a, const Term& b) {
  TermKind ka = term_kind(a);
  TermKind kb = term_kind(b);
  if (ka != kb) return {static_cast<int>(ka) < static_cast<int>(kb) ? -1 : 1, false};
  switch (ka) {
    case TermKind::iri:
      return {detail::cmp3(as_iri(a).value, as_iri(b).value), true};
    case TermKind::numeric:
      return {compare_decimal_lexicals(as_literal(a).lexical, as_literal(b).lexical),
              true};
    case TermKind::date:
      // Valid xsd:date lexicals are zero padded, so bytewise order is
      // chronological order.
      return {detail::cmp3(as_literal(a).lexical, as_literal(b).lexical), true};
    case TermKind::string: {
      const Literal& la = as_literal(a);
      const Literal& lb = as_literal(b);
      int c = detail::cmp3(la.lexical, lb.lexical);
      if (c == 0) c = detail::cmp3(la.datatype.value, lb.datatype.value);
      if (c == 0) c = detail::cmp3(la.language, lb.language);
      return {c, true};
    }
  }
  return {0, true};
}

// ---------------------------------------------------------------------------
// Abstract syntax

enum class Comparator { lt, le, eq, ne, ge, gt };

inline const char* comparator_token(Comparator c) {
  switch (c) {
    case Comparator::lt: return "<";
    case Comparator::le: return "<=";
    case Comparator::eq: return "=";
    case Comparator::ne: return "!=";
    case Comparator::ge: return ">=";
    case Comparator::gt: return ">";
  }
  return "=";
}

struct FilterExpr;
using FilterPtr = std::shared_ptr<FilterExpr>;
using FilterOperand = std::variant<Var, Term>;

struct FilterExpr {
  enum class Kind { comparison, logical_and, logical_or, logical_not };

  Kind kind = Kind::comparison;
  // comparison
  Comparator op = Comparator::eq;
  FilterOperand lhs = Var{};
  FilterOperand rhs = Var{};
  // logical_and / logical_or use both children, logical_not only left
  FilterPtr left;
  FilterPtr right;
};

inline FilterPtr make_comparison(FilterOperand lhs, Comparator op, FilterOperand rhs) {
  auto e = std::make_shared<FilterExpr>();
  e->kind = FilterExpr::Kind::comparison;
  e->op = op;
  e->lhs = std::move(lhs);
  e->rhs = std::move(rhs);
  return e;
}

inline FilterPtr make_logical(FilterExpr::Kind kind, FilterPtr l, FilterPtr r) {
  auto e = std::make_shared<FilterExpr>();
  e->kind = kind;
  e->left = std::move(l);
  e->right = std::move(r);
  return e;
}

inline FilterPtr make_and(FilterPtr l, FilterPtr r) {
  return make_logical(FilterExpr::Kind::logical_and, std::move(l), std::move(r));
}
inline FilterPtr make_or(FilterPtr l, FilterPtr r) {
  return make_logical(FilterExpr::Kind::logical_or, std::move(l), std::move(r));
}
inline FilterPtr make_not(FilterPtr child) {
  return make_logical(FilterExpr::Kind::logical_not, std::move(child), nullptr);
}

inline bool filter_equal(const FilterExpr* a, const FilterExpr* b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case FilterExpr::Kind::comparison:
      return a->op == b->op && a->lhs == b->lhs && a->rhs == b->rhs;
    case FilterExpr::Kind::logical_not:
      return filter_equal(a->left.get(), b->left.get());
    default:
      return filter_equal(a->left.get(), b->left.get()) &&
             filter_equal(a->right.get(), b->right.get());
  }
}

enum class AggregateFn { count, sum, avg, min, max };

inline const char* aggregate_name(AggregateFn fn) {
  switch (fn) {
    case AggregateFn::count: return "COUNT";
    case AggregateFn::sum: return "SUM";
    case AggregateFn::avg: return "AVG";
    case AggregateFn::min: return "MIN";
    case AggregateFn::max: return "MAX";
  }
  return "COUNT";
}

// Either a plain variable or an aggregate expression with an AS alias.
struct Projection {
  bool is_aggregate = false;
  Var variable{};  // the plain variable, or the aggregate argument
  AggregateFn fn = AggregateFn::count;
  bool count_star = false;  // COUNT(*)
  Var alias{};              // aggregates only

  bool operator==(const Projection&) const = default;
};

inline Projection project_var(std::string name) {
  Projection p;
  p.variable = Var{std::move(name)};
  return p;
}

inline Projection project_aggregate(AggregateFn fn, std::string arg, std::string alias) {
  Projection p;
  p.is_aggregate = true;
  p.fn = fn;
  p.variable = Var{std::move(arg)};
  p.alias = Var{std::move(alias)};
  return p;
}

inline Projection project_count_star(std::string alias) {
  Projection p;
  p.is_aggregate = true;
  p.fn = AggregateFn::count;
  p.count_star = true;
  p.alias = Var{std::move(alias)};
  return p;
}

struct OrderKey {
  Var variable;
  bool descending = false;

  bool operator==(const OrderKey&) const = default;
};

struct Query {
  PrefixMap prefixes;
  bool distinct = false;
  std::vector<Projection> select;
  std::vector<TriplePattern> where;
  std::vector<FilterPtr> filters;
  std::vector<Var> group_by;
  std::vector<OrderKey> order_by;
  std::optional<std::uint64_t> limit;
  std::optional<std::uint64_t> offset;
};

inline bool operator==(const Query& a, const Query& b) {
  if (!(a.prefixes == b.prefixes) || a.distinct != b.distinct ||
      a.select != b.select || a.where != b.where || a.group_by != b.group_by ||
      a.order_by != b.order_by || a.limit != b.limit || a.offset != b.offset)
    return false;
  if (a.filters.size() != b.filters.size()) return false;
  for (std::size_t i = 0; i < a.filters.size(); ++i)
    if (!filter_equal(a.filters[i].get(), b.filters[i].get())) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Lexer

namespace detail {

enum class TokKind {
  eof,
  word,      // bare identifier: keywords and the 'a' shorthand
  variable,  // ?name / $name, text holds the bare name
  iriref,    // text holds the content between < >
  pname,     // text holds "prefix:local"
  string,    // text holds the decoded value
  integer,
  decimal,
  lparen,
  rparen,
  lbrace,
  rbrace,
  dot,
  semicolon,
  comma,
  star,
  and_and,
  or_or,
  bang,
  lt,
  le,
  eq,
  ne,
  ge,
  gt,
  caret_caret,
  lang_tag,  // @tag, text holds the bare tag
  slash,     // only ever a property-path diagnostic
  pipe,      // likewise
  caret,     // likewise (single ^)
  plus       // likewise
};

struct Token {
  TokKind kind = TokKind::eof;
  std::string text;
  int line = 1;
  int column = 1;
};

inline bool iri_char_ok(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  if (u <= 0x20) return false;
  switch (c) {
    case '<': case '>': case '"': case '{': case '}':
    case '|': case '^': case '`': case '\\':
      return false;
    default:
      return true;
  }
}

class QueryLexer {
 public:
  explicit QueryLexer(std::string_view src) : src_(src) {}

  Result<std::vector<Token>> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      int line = line_;
      int col = col_;
      if (eof()) {
        out.push_back({TokKind::eof, "", line, col});
        return out;
      }
      char c = peek();
      if (c == '?' || c == '$') {
        advance();
        std::string name = scan_name();
        if (name.empty())
          return fail(line, col, "expected variable name after '" +
                                     std::string(1, c) + "'");
        out.push_back({TokKind::variable, std::move(name), line, col});
      } else if (c == '<') {
        Token t = lex_after_lt(line, col);
        out.push_back(std::move(t));
      } else if (c == '"') {
        auto s = lex_string();
        if (!s.ok()) return s.error();
        out.push_back({TokKind::string, std::move(s).value(), line, col});
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 ((c == '-' || c == '+') &&
                  (std::isdigit(static_cast<unsigned char>(peek(1))) ||
                   (peek(1) == '.' &&
                    std::isdigit(static_cast<unsigned char>(peek(2)))))) ||
                 (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
        out.push_back(lex_number(line, col));
      } else if (c == '_' && peek(1) == ':') {
        return fail(line, col, "blank nodes are not supported");
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
                 c == ':') {
        out.push_back(lex_word_or_pname(line, col));
      } else {
        switch (c) {
          case '(': advance(); out.push_back({TokKind::lparen, "(", line, col}); break;
          case ')': advance(); out.push_back({TokKind::rparen, ")", line, col}); break;
          case '{': advance(); out.push_back({TokKind::lbrace, "{", line, col}); break;
          case '}': advance(); out.push_back({TokKind::rbrace, "}", line, col}); break;
          case '.': advance(); out.push_back({TokKind::dot, ".", line, col}); break;
          case ';': advance(); out.push_back({TokKind::semicolon, ";", line, col}); break;
          case ',': advance(); out.push_back({TokKind::comma, ",", line, col}); break;
          case '*': advance(); out.push_back({TokKind::star, "*", line, col}); break;
          case '/': advance(); out.push_back({TokKind::slash, "/", line, col}); break;
          case '|':
            advance();
            if (peek() == '|') {
              advance();
              out.push_back({TokKind::or_or, "||", line, col});
            } else {
              out.push_back({TokKind::pipe, "|", line, col});
            }
            break;
          case '&':
            advance();
            if (peek() != '&') return fail(line, col, "expected '&&'");
            advance();
            out.push_back({TokKind::and_and, "&&", line, col});
            break;
          case '!':
            advance();
            if (peek() == '=') {
              advance();
              out.push_back({TokKind::ne, "!=", line, col});
            } else {
              out.push_back({TokKind::bang, "!", line, col});
            }
            break;
          case '=': advance(); out.push_back({TokKind::eq, "=", line, col}); break;
          case '>':
            advance();
            if (peek() == '=') {
              advance();
              out.push_back({TokKind::ge, ">=", line, col});
            } else {
              out.push_back({TokKind::gt, ">", line, col});
            }
            break;
          case '^':
            advance();
            if (peek() == '^') {
              advance();
              out.push_back({TokKind::caret_caret, "^^", line, col});
            } else {
              out.push_back({TokKind::caret, "^", line, col});
            }
            break;
          case '+': advance(); out.push_back({TokKind::plus, "+", line, col}); break;
          case '@': {
            advance();
            std::string tag = scan_lang_tag();
            if (tag.empty())
              return fail(line, col, "expected language tag after '@'");
            out.push_back({TokKind::lang_tag, std::move(tag), line, col});
            break;
          }
          default:
            return fail(line, col, "unexpected character '" +
                                       std::string(1, c) + "'");
        }
      }
    }
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  bool eof() const { return pos_ >= src_.size(); }
  char peek(std::size_t k = 0) const {
    return pos_ + k < src_.size() ? src_[pos_ + k] : '\0';
  }
  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  static Error fail(int line, int col, std::string msg) {
    Error e{Errc::syntax_error, std::move(msg)};
    e.line = line;
    e.column = col;
    return e;
  }

  void skip_trivia() {
    for (;;) {
      while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) advance();
      if (!eof() && peek() == '#') {
        while (!eof() && peek() != '\n') advance();
        continue;
      }
      return;
    }
  }

  std::string scan_name() {
    std::string name;
    while (!eof()) {
      char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
        name += advance();
      } else {
        break;
      }
    }
    return name;
  }

  std::string scan_lang_tag() {
    std::string tag;
    while (!eof() && std::isalpha(static_cast<unsigned char>(peek())))
      tag += advance();
    if (tag.empty()) return tag;
    while (peek() == '-' &&
           std::isalnum(static_cast<unsigned char>(peek(1)))) {
      tag += advance();
      while (!eof() && std::isalnum(static_cast<unsigned char>(peek())))
        tag += advance();
    }
    return tag;
  }

  // '<' begins an IRIREF only when a '>' arrives before any character that
  // cannot appear inside one; otherwise it is the less-than operator.
  Token lex_after_lt(int line, int col) {
    std::size_t j = pos_ + 1;
    bool iriref = false;
    while (j < src_.size()) {
      char c = src_[j];
      if (c == '>') {
        iriref = true;
        break;
      }
      if (!iri_char_ok(c)) break;
      ++j;
    }
    if (iriref) {
      advance();  // '<'
      std::string value;
      while (peek() != '>') value += advance();
      advance();  // '>'
      return {TokKind::iriref, std::move(value), line, col};
    }
    advance();
    if (peek() == '=') {
      advance();
      return {TokKind::le, "<=", line, col};
    }
    return {TokKind::lt, "<", line, col};
  }

  Result<std::string> lex_string() {
    int line = line_;
    int col = col_;
    advance();  // opening quote
    std::string value;
    for (;;) {
      if (eof() || peek() == '\n')
        return fail(line, col, "unterminated string literal");
      char c = advance();
      if (c == '"') return value;
      if (c == '\\') {
        if (eof()) return fail(line, col, "unterminated string literal");
        char e = advance();
        switch (e) {
          case '"': value += '"'; break;
          case '\\': value += '\\'; break;
          case 'n': value += '\n'; break;
          case 'r': value += '\r'; break;
          case 't': value += '\t'; break;
          default:
            return fail(line_, col_ - 2,
                        "unsupported escape '\\" + std::string(1, e) + "'");
        }
      } else {
        value += c;
      }
    }
  }

  Token lex_number(int line, int col) {
    std::string text;
    if (peek() == '+' || peek() == '-') text += advance();
    while (std::isdigit(static_cast<unsigned char>(peek()))) text += advance();
    bool decimal = false;
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      decimal = true;
      text += advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) text += advance();
    }
    return {decimal ? TokKind::decimal : TokKind::integer, std::move(text), line,
            col};
  }

  Token lex_word_or_pname(int line, int col) {
    std::string head;
    while (!eof()) {
      char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
        head += advance();
      } else {
        break;
      }
    }
    if (peek() != ':') return {TokKind::word, std::move(head), line, col};
    advance();  // ':'
    std::string local;
    while (!eof()) {
      char c = peek();
      bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
                c == '-' || c == '.' || c == '%';
      if (!ok) break;
      local += advance();
    }
    // A trailing dot belongs to the statement, not the local part.  The
    // lexer consumed it; hand it back as a separate token by rewinding.
    while (!local.empty() && local.back() == '.') {
      local.pop_back();
      --pos_;
      --col_;
    }
    return {TokKind::pname, head + ":" + local, line, col};
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Parser

namespace detail {

inline std::string upper(std::string_view s) {
  std::string r;
  r.reserve(s.size());
  for (char c : s) r += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return r;
}

class QueryParser {
 public:
  explicit QueryParser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Result<Query> run() {
    if (auto st = parse_prologue(); !st.ok()) return st.error();
    if (auto st = parse_select(); !st.ok()) return st.error();
    if (auto st = parse_where(); !st.ok()) return st.error();
    if (auto st = parse_modifiers(); !st.ok()) return st.error();
    if (cur().kind != TokKind::eof)
      return err(cur(), "unexpected trailing input");
    if (auto st = validate(); !st.ok()) return st.error();
    return std::move(q_);
  }

 private:
  std::vector<Token> toks_;
  std::size_t i_ = 0;
  Query q_;

  const Token& cur() const { return toks_[i_]; }
  const Token& take() { return toks_[i_++]; }
  void skip() { ++i_; }

  bool is_word(const char* kw) const {
    return cur().kind == TokKind::word && upper(cur().text) == kw;
  }

  static Error err(const Token& t, std::string msg) {
    Error e{Errc::syntax_error, std::move(msg)};
    e.line = t.line;
    e.column = t.column;
    return e;
  }

  static Error unsupported(const Token& t, std::string message) {
    Error e{Errc::unsupported_feature, std::move(message)};
    e.line = t.line;
    e.column = t.column;
    return e;
  }

  static Error locate(Error e, const Token& t) {
    if (e.line == 0) {
      e.line = t.line;
      e.column = t.column;
    }
    return e;
  }

  Status parse_prologue() {
    std::vector<std::pair<std::string, Iri>> decls;
    while (is_word("PREFIX")) {
      skip();
      if (cur().kind != TokKind::pname)
        return err(cur(), "expected prefix label after PREFIX");
      Token label_tok = take();
      std::string text = label_tok.text;
      if (text.empty() || text.back() != ':')
        return err(label_tok, "prefix label must end in ':'");
      std::string label = text.substr(0, text.size() - 1);
      if (cur().kind != TokKind::iriref)
        return err(cur(), "expected IRI after prefix label");
      Token iri_tok = take();
      auto iri = validate_iri(iri_tok.text);
      if (!iri.ok()) return locate(iri.error(), iri_tok);
      // Redefinition follows document order: the latest binding wins.
      bool replaced = false;
      for (auto& [l, ns] : decls) {
        if (l == label) {
          ns = std::move(iri).value();
          replaced = true;
          break;
        }
      }
      if (!replaced) decls.emplace_back(label, std::move(iri).value());
    }
    for (auto& [label, ns] : decls) {
      if (auto st = q_.prefixes.add(label, std::move(ns)); !st.ok())
        return st.error();
    }
    return ok_status();
  }

  Status parse_select() {
    if (!is_word("SELECT")) {
      for (const char* form : {"CONSTRUCT", "ASK", "DESCRIBE", "INSERT", "DELETE"})
        if (is_word(form)) return unsupported(cur(), upper(form) + " queries are not supported");
      return err(cur(), "expected SELECT");
    }
    skip();
    if (is_word("DISTINCT")) {
      q_.distinct = true;
      skip();
    } else if (is_word("REDUCED")) {
      return unsupported(cur(), "REDUCED is not supported");
    }
    for (;;) {
      if (cur().kind == TokKind::variable) {
        q_.select.push_back(project_var(take().text));
      } else if (cur().kind == TokKind::lparen) {
        auto p = parse_aggregate();
        if (!p.ok()) return p.error();
        q_.select.push_back(std::move(p).value());
      } else if (cur().kind == TokKind::star) {
        return err(cur(), "SELECT * is not supported; list variables explicitly");
      } else {
        break;
      }
    }
    if (q_.select.empty())
      return err(cur(), "expected at least one projected variable");
    return ok_status();
  }

  Result<Projection> parse_aggregate() {
    skip();  // '('
    if (cur().kind != TokKind::word)
      return err(cur(), "expected aggregate function");
    Token fn_tok = take();
    std::string fn_name = upper(fn_tok.text);
    AggregateFn fn;
    if (fn_name == "COUNT") fn = AggregateFn::count;
    else if (fn_name == "SUM") fn = AggregateFn::sum;
    else if (fn_name == "AVG") fn = AggregateFn::avg;
    else if (fn_name == "MIN") fn = AggregateFn::min;
    else if (fn_name == "MAX") fn = AggregateFn::max;
    else return err(fn_tok, "unknown aggregate '" + fn_tok.text + "'");
    if (cur().kind != TokKind::lparen)
      return err(cur(), "expected '(' after " + fn_name);
    skip();
    if (is_word("DISTINCT"))
      return unsupported(cur(), "DISTINCT inside aggregates is not supported");
    Projection p;
    p.is_aggregate = true;
    p.fn = fn;
    if (cur().kind == TokKind::star) {
      if (fn != AggregateFn::count)
        return err(cur(), fn_name + "(*) is not valid; use a variable");
      p.count_star = true;
      skip();
    } else if (cur().kind == TokKind::variable) {
      p.variable = Var{take().text};
    } else {
      return err(cur(), "expected variable or '*' in aggregate");
    }
    if (cur().kind != TokKind::rparen)
      return err(cur(), "expected ')' after aggregate argument");
    skip();
    if (!is_word("AS")) return err(cur(), "expected AS in aggregate projection");
    skip();
    if (cur().kind != TokKind::variable)
      return err(cur(), "expected alias variable after AS");
    p.alias = Var{take().text};
    if (cur().kind != TokKind::rparen)
      return err(cur(), "expected ')' to close aggregate projection");
    skip();
    return p;
  }

  Status parse_where() {
    if (!is_word("WHERE")) return err(cur(), "expected WHERE");
    skip();
    if (cur().kind != TokKind::lbrace) return err(cur(), "expected '{'");
    skip();
    for (;;) {
      if (cur().kind == TokKind::rbrace) {
        skip();
        return ok_status();
      }
      if (cur().kind == TokKind::eof) return err(cur(), "expected '}'");
      if (is_word("FILTER")) {
        skip();
        if (cur().kind != TokKind::lparen)
          return err(cur(), "expected '(' after FILTER");
        skip();
        auto e = parse_or();
        if (!e.ok()) return e.error();
        if (cur().kind != TokKind::rparen)
          return err(cur(), "expected ')' to close FILTER");
        skip();
        if (cur().kind == TokKind::dot) skip();
        q_.filters.push_back(std::move(e).value());
        continue;
      }
      for (const char* kw : {"OPTIONAL", "UNION", "MINUS", "BIND", "VALUES",
                             "SERVICE", "EXISTS"})
        if (is_word(kw)) return unsupported(cur(), upper(kw) + " is not supported");
      if (is_word("GRAPH")) return unsupported(cur(), "named graphs (GRAPH) are not supported");
      if (is_word("SELECT")) return unsupported(cur(), "subqueries are not supported");
      if (cur().kind == TokKind::lbrace)
        return unsupported(cur(), "nested group patterns are not supported");
      if (auto st = parse_triples_block(); !st.ok()) return st.error();
    }
  }

  Status parse_triples_block() {
    auto subject = parse_pattern_term(/*predicate_position=*/false,
                                      /*allow_literal=*/false);
    if (!subject.ok()) return subject.error();
    for (;;) {
      auto verb = parse_verb();
      if (!verb.ok()) return verb.error();
      if (cur().kind == TokKind::slash || cur().kind == TokKind::pipe ||
          cur().kind == TokKind::caret || cur().kind == TokKind::star ||
          cur().kind == TokKind::plus)
        return unsupported(cur(), "property paths are not supported");
      for (;;) {
        auto object = parse_pattern_term(false, /*allow_literal=*/true);
        if (!object.ok()) return object.error();
        q_.where.push_back(TriplePattern{subject.value(), verb.value(),
                                         std::move(object).value()});
        if (cur().kind == TokKind::comma) {
          skip();
          continue;
        }
        break;
      }
      if (cur().kind == TokKind::semicolon) {
        skip();
        // allow a trailing ';' before '.' or '}'
        if (cur().kind == TokKind::dot) {
          skip();
          return ok_status();
        }
        if (cur().kind == TokKind::rbrace) return ok_status();
        continue;
      }
      if (cur().kind == TokKind::dot) {
        skip();
        return ok_status();
      }
      if (cur().kind == TokKind::rbrace) return ok_status();
      return err(cur(), "expected ',', ';', '.' or '}' after object");
    }
  }

  Result<PatternTerm> parse_verb() {
    if (cur().kind == TokKind::caret)
      return unsupported(cur(), "property paths are not supported");
    if (cur().kind == TokKind::word && cur().text == "a") {
      skip();
      return PatternTerm{Term{vocab::rdf_type()}};
    }
    return parse_pattern_term(/*predicate_position=*/true,
                              /*allow_literal=*/false);
  }

  Result<PatternTerm> parse_pattern_term(bool predicate_position,
                                         bool allow_literal) {
    const Token& t = cur();
    switch (t.kind) {
      case TokKind::variable:
        return PatternTerm{Var{take().text}};
      case TokKind::iriref: {
        Token tok = take();
        auto iri = validate_iri(tok.text);
        if (!iri.ok()) return locate(iri.error(), tok);
        return PatternTerm{Term{std::move(iri).value()}};
      }
      case TokKind::pname: {
        Token tok = take();
        auto iri = expand_pname(tok.text, q_.prefixes);
        if (!iri.ok()) return locate(iri.error(), tok);
        return PatternTerm{Term{std::move(iri).value()}};
      }
      case TokKind::string:
      case TokKind::integer:
      case TokKind::decimal: {
        if (!allow_literal)
          return err(t, predicate_position
                            ? "predicate must be an IRI or variable"
                            : "subject must be an IRI or variable");
        auto lit = parse_literal();
        if (!lit.ok()) return lit.error();
        return PatternTerm{Term{std::move(lit).value()}};
      }
      default:
        return err(t, predicate_position
                          ? "expected predicate"
                          : (allow_literal ? "expected RDF term or variable"
                                           : "expected IRI or variable"));
    }
  }

  Result<Literal> parse_literal() {
    Token tok = take();
    if (tok.kind == TokKind::integer) {
      auto lit = make_typed_literal(tok.text, vocab::xsd_integer());
      if (!lit.ok()) return locate(lit.error(), tok);
      return std::move(lit).value();
    }
    if (tok.kind == TokKind::decimal) {
      auto lit = make_typed_literal(tok.text, vocab::xsd_decimal());
      if (!lit.ok()) return locate(lit.error(), tok);
      return std::move(lit).value();
    }
    // string, optionally tagged or typed
    if (cur().kind == TokKind::lang_tag) {
      Token tag = take();
      auto lit = make_lang_literal(tok.text, tag.text);
      if (!lit.ok()) return locate(lit.error(), tok);
      return std::move(lit).value();
    }
    if (cur().kind == TokKind::caret_caret) {
      skip();
      Result<Iri> dt = Error{Errc::syntax_error, "expected datatype IRI"};
      if (cur().kind == TokKind::iriref) {
        Token dtok = take();
        dt = validate_iri(dtok.text);
        if (!dt.ok()) return locate(dt.error(), dtok);
      } else if (cur().kind == TokKind::pname) {
        Token dtok = take();
        dt = expand_pname(dtok.text, q_.prefixes);
        if (!dt.ok()) return locate(dt.error(), dtok);
      } else {
        return err(cur(), "expected datatype IRI after '^^'");
      }
      auto lit = make_typed_literal(tok.text, std::move(dt).value());
      if (!lit.ok()) return locate(lit.error(), tok);
      return std::move(lit).value();
    }
    return string_literal(tok.text);
  }

  Result<FilterPtr> parse_or() {
    auto left = parse_and();
    if (!left.ok()) return left;
    FilterPtr e = std::move(left).value();
    while (cur().kind == TokKind::or_or) {
      skip();
      auto right = parse_and();
      if (!right.ok()) return right;
      e = make_or(std::move(e), std::move(right).value());
    }
    return e;
  }

  Result<FilterPtr> parse_and() {
    auto left = parse_unary();
    if (!left.ok()) return left;
    FilterPtr e = std::move(left).value();
    while (cur().kind == TokKind::and_and) {
      skip();
      auto right = parse_unary();
      if (!right.ok()) return right;
      e = make_and(std::move(e), std::move(right).value());
    }
    return e;
  }

  Result<FilterPtr> parse_unary() {
    if (cur().kind == TokKind::bang) {
      skip();
      auto child = parse_unary();
      if (!child.ok()) return child;
      return make_not(std::move(child).value());
    }
    if (cur().kind == TokKind::lparen) {
      skip();
      auto e = parse_or();
      if (!e.ok()) return e;
      if (cur().kind != TokKind::rparen)
        return err(cur(), "expected ')' in FILTER expression");
      skip();
      return e;
    }
    return parse_comparison();
  }

  Result<FilterPtr> parse_comparison() {
    auto lhs = parse_operand();
    if (!lhs.ok()) return lhs.error();
    Comparator op;
    switch (cur().kind) {
      case TokKind::lt: op = Comparator::lt; break;
      case TokKind::le: op = Comparator::le; break;
      case TokKind::eq: op = Comparator::eq; break;
      case TokKind::ne: op = Comparator::ne; break;
      case TokKind::ge: op = Comparator::ge; break;
      case TokKind::gt: op = Comparator::gt; break;
      default:
        return err(cur(), "expected comparison operator");
    }
    skip();
    auto rhs = parse_operand();
    if (!rhs.ok()) return rhs.error();
    return make_comparison(std::move(lhs).value(), op, std::move(rhs).value());
  }

  Result<FilterOperand> parse_operand() {
    const Token& t = cur();
    switch (t.kind) {
      case TokKind::variable:
        return FilterOperand{Var{take().text}};
      case TokKind::iriref: {
        Token tok = take();
        auto iri = validate_iri(tok.text);
        if (!iri.ok()) return locate(iri.error(), tok);
        return FilterOperand{Term{std::move(iri).value()}};
      }
      case TokKind::pname: {
        Token tok = take();
        auto iri = expand_pname(tok.text, q_.prefixes);
        if (!iri.ok()) return locate(iri.error(), tok);
        return FilterOperand{Term{std::move(iri).value()}};
      }
      case TokKind::string:
      case TokKind::integer:
      case TokKind::decimal: {
        auto lit = parse_literal();
        if (!lit.ok()) return lit.error();
        return FilterOperand{Term{std::move(lit).value()}};
      }
      default:
        return err(t, "expected variable or constant in FILTER");
    }
  }

  Status parse_modifiers() {
    if (is_word("GROUP")) {
      skip();
      if (!is_word("BY")) return err(cur(), "expected BY after GROUP");
      skip();
      while (cur().kind == TokKind::variable)
        q_.group_by.push_back(Var{take().text});
      if (q_.group_by.empty())
        return err(cur(), "expected variable after GROUP BY");
    }
    if (is_word("HAVING")) return unsupported(cur(), "HAVING is not supported");
    if (is_word("ORDER")) {
      skip();
      if (!is_word("BY")) return err(cur(), "expected BY after ORDER");
      skip();
      for (;;) {
        if (cur().kind == TokKind::variable) {
          q_.order_by.push_back(OrderKey{Var{take().text}, false});
        } else if (is_word("ASC") || is_word("DESC")) {
          bool desc = upper(cur().text) == "DESC";
          skip();
          if (cur().kind != TokKind::lparen)
            return err(cur(), "expected '(' after ASC/DESC");
          skip();
          if (cur().kind != TokKind::variable)
            return err(cur(), "expected variable in ORDER BY key");
          q_.order_by.push_back(OrderKey{Var{take().text}, desc});
          if (cur().kind != TokKind::rparen)
            return err(cur(), "expected ')' in ORDER BY key");
          skip();
        } else {
          break;
        }
      }
      if (q_.order_by.empty())
        return err(cur(), "expected sort key after ORDER BY");
    }
    bool saw_limit = false;
    bool saw_offset = false;
    for (;;) {
      if (is_word("LIMIT")) {
        Token kw = take();
        if (saw_limit) return err(kw, "duplicate LIMIT");
        saw_limit = true;
        auto n = parse_non_negative("LIMIT");
        if (!n.ok()) return n.error();
        q_.limit = n.value();
      } else if (is_word("OFFSET")) {
        Token kw = take();
        if (saw_offset) return err(kw, "duplicate OFFSET");
        saw_offset = true;
        auto n = parse_non_negative("OFFSET");
        if (!n.ok()) return n.error();
        q_.offset = n.value();
      } else {
        return ok_status();
      }
    }
  }

  Result<std::uint64_t> parse_non_negative(const char* what) {
    if (cur().kind != TokKind::integer)
      return err(cur(), std::string(what) + " requires an integer");
    Token tok = take();
    if (!tok.text.empty() && (tok.text[0] == '-' || tok.text[0] == '+'))
      return err(tok, std::string(what) + " must be a non-negative integer");
    std::uint64_t v = 0;
    for (char c : tok.text) {
      if (v > (UINT64_MAX - 9) / 10)
        return err(tok, std::string(what) + " value out of range");
      v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return v;
  }

  Status validate() const {
    std::set<std::string> pattern_vars;
    for (const TriplePattern& p : q_.where) {
      for (const PatternTerm* pt : {&p.subject, &p.predicate, &p.object})
        if (!store::is_bound(*pt))
          pattern_vars.insert(store::pattern_var(*pt).name);
    }
    std::set<std::string> group_vars;
    for (const Var& g : q_.group_by) group_vars.insert(g.name);

    bool has_aggregate = false;
    for (const Projection& p : q_.select)
      if (p.is_aggregate) has_aggregate = true;

    std::set<std::string> output_names;
    for (const Projection& p : q_.select) {
      const std::string& name = p.is_aggregate ? p.alias.name : p.variable.name;
      if (!output_names.insert(name).second)
        return Error{Errc::syntax_error,
                     "duplicate projection name ?" + name};
      if (p.is_aggregate) {
        if (pattern_vars.count(p.alias.name))
          return Error{Errc::syntax_error, "aggregate alias ?" + p.alias.name +
                                               " is already bound in the pattern"};
        continue;
      }
      if (!q_.group_by.empty()) {
        if (!group_vars.count(name))
          return Error{Errc::unbound_projection,
                       "projected variable ?" + name +
                           " must appear in GROUP BY"};
      } else if (has_aggregate) {
        return Error{Errc::unbound_projection,
                     "plain variable ?" + name +
                         " cannot be mixed with aggregates without GROUP BY"};
      } else if (!pattern_vars.count(name)) {
        return Error{Errc::unbound_projection,
                     "projected variable ?" + name +
                         " is not bound by the pattern"};
      }
    }
    return ok_status();
  }
};

}  // namespace detail

inline Result<Query> parse_query(std::string_view text) {
  detail::QueryLexer lexer(text);
  auto tokens = lexer.run();
  if (!tokens.ok()) return tokens.error();
  detail::QueryParser parser(std::move(tokens).value());
  return parser.run();
}

// ---------------------------------------------------------------------------
// Printer.  parse_query(print_query(q)) == q for every parseable query.

namespace detail {

inline std::string operand_to_text(const FilterOperand& o) {
  if (std::holds_alternative<Var>(o))
    return "?" + std::get<Var>(o).name;
  return turtle::term_to_ntriples(std::get<Term>(o));
}

inline std::string filter_to_text(const FilterExpr& e) {
  switch (e.kind) {
    case FilterExpr::Kind::comparison:
      return operand_to_text(e.lhs) + " " + comparator_token(e.op) + " " +
             operand_to_text(e.rhs);
    case FilterExpr::Kind::logical_not:
      return "!(" + filter_to_text(*e.left) + ")";
    case FilterExpr::Kind::logical_and:
    case FilterExpr::Kind::logical_or: {
      const char* op =
          e.kind == FilterExpr::Kind::logical_and ? " && " : " || ";
      auto wrap = [](const FilterExpr& child) {
        std::string s = filter_to_text(child);
        if (child.kind == FilterExpr::Kind::logical_and ||
            child.kind == FilterExpr::Kind::logical_or)
          return "(" + s + ")";
        return s;
      };
      return wrap(*e.left) + op + wrap(*e.right);
    }
  }
  return "";
}

inline std::string pattern_term_to_text(const PatternTerm& pt,
                                        bool predicate_position) {
  if (!store::is_bound(pt)) return "?" + store::pattern_var(pt).name;
  const Term& t = store::bound_term(pt);
  if (predicate_position && is_iri(t) && as_iri(t) == vocab::rdf_type())
    return "a";
  return turtle::term_to_ntriples(t);
}

inline std::string projection_to_text(const Projection& p) {
  if (!p.is_aggregate) return "?" + p.variable.name;
  std::string arg = p.count_star ? "*" : "?" + p.variable.name;
  return std::string("(") + aggregate_name(p.fn) + "(" + arg + ") AS ?" +
         p.alias.name + ")";
}

}  // namespace detail

inline std::string print_query(const Query& q) {
  std::string out;
  for (const auto& [label, ns] : q.prefixes.entries())
    out += "PREFIX " + label + ": <" + ns.value + ">\n";
  out += "SELECT";
  if (q.distinct) out += " DISTINCT";
  for (const Projection& p : q.select) out += " " + detail::projection_to_text(p);
  out += "\nWHERE {\n";
  for (const TriplePattern& p : q.where) {
    out += "  " + detail::pattern_term_to_text(p.subject, false) + " " +
           detail::pattern_term_to_text(p.predicate, true) + " " +
           detail::pattern_term_to_text(p.object, false) + " .\n";
  }
  for (const FilterPtr& f : q.filters)
    out += "  FILTER (" + detail::filter_to_text(*f) + ")\n";
  out += "}\n";
  if (!q.group_by.empty()) {
    out += "GROUP BY";
    for (const Var& v : q.group_by) out += " ?" + v.name;
    out += "\n";
  }
  if (!q.order_by.empty()) {
    out += "ORDER BY";
    for (const OrderKey& k : q.order_by)
      out += k.descending ? " DESC(?" + k.variable.name + ")"
                          : " ?" + k.variable.name;
    out += "\n";
  }
  if (q.limit) out += "LIMIT " + std::to_string(*q.limit) + "\n";
  if (q.offset) out += "OFFSET " + std::to_string(*q.offset) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

struct BindingTable {
  std::vector<std::string> vars;
  using Row = std::vector<std::optional<Term>>;
  std::vector<Row> rows;
  // SUM/AVG rows whose value was bound but not numeric; skipped, not fatal.
  std::size_t aggregate_warnings = 0;
};

struct EvalOptions {
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

// Greedy join order: repeatedly take the cheapest remaining pattern by
// match-count probe, preferring patterns that share a variable with the
// patterns already joined.  Ties break toward the original order.
inline std::vector<std::size_t> plan_bgp(const std::vector<TriplePattern>& patterns,
                                         const store::ReadView& view) {
  const std::size_t n = patterns.size();
  std::vector<std::size_t> cost(n);
  std::vector<std::set<std::string>> vars(n);
  for (std::size_t i = 0; i < n; ++i) {
    cost[i] = view.match_count(patterns[i]);
    for (const PatternTerm* pt :
         {&patterns[i].subject, &patterns[i].predicate, &patterns[i].object})
      if (!store::is_bound(*pt)) vars[i].insert(store::pattern_var(*pt).name);
  }
  std::vector<bool> chosen(n, false);
  std::set<std::string> joined;
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best = n;
    bool best_shared = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (chosen[i]) continue;
      bool shared = false;
      for (const std::string& v : vars[i])
        if (joined.count(v)) {
          shared = true;
          break;
        }
      bool better;
      if (best == n) {
        better = true;
      } else if (shared != best_shared) {
        better = shared;
      } else {
        better = cost[i] < cost[best];
      }
      if (better) {
        best = i;
        best_shared = shared;
      }
    }
    chosen[best] = true;
    order.push_back(best);
    joined.insert(vars[best].begin(), vars[best].end());
  }
  return order;
}

namespace detail {

struct RowLess {
  bool operator()(const BindingTable::Row& a, const BindingTable::Row& b) const {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
      const bool ba = a[i].has_value();
      const bool bb = b[i].has_value();
      if (ba != bb) return bb;  // unbound sorts first
      if (!ba) continue;
      if (term_less(*a[i], *b[i])) return true;
      if (term_less(*b[i], *a[i])) return false;
    }
    return a.size() < b.size();
  }
};

struct VarColumns {
  std::vector<std::string> names;
  std::map<std::string, std::size_t> index;

  std::size_t get_or_add(const std::string& name) {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    names.push_back(name);
    index.emplace(name, names.size() - 1);
    return names.size() - 1;
  }
  const std::size_t* find(const std::string& name) const {
    auto it = index.find(name);
    return it == index.end() ? nullptr : &it->second;
  }
};

inline bool past(const EvalOptions& opt) {
  return opt.deadline && std::chrono::steady_clock::now() > *opt.deadline;
}

inline Error timeout_error() {
  return Error{Errc::timeout, "query evaluation exceeded its deadline"};
}

inline std::optional<Term> operand_value(const FilterOperand& o,
                                         const BindingTable::Row& row,
                                         const VarColumns& cols) {
  if (std::holds_alternative<Term>(o)) return std::get<Term>(o);
  const std::size_t* col = cols.find(std::get<Var>(o).name);
  if (!col || *col >= row.size()) return std::nullopt;
  return row[*col];
}

// Boolean semantics: comparisons over unbound variables or across term
// kinds are false, never errors, and '!' is plain negation.
inline bool eval_filter(const FilterExpr& e, const BindingTable::Row& row,
                        const VarColumns& cols) {
  switch (e.kind) {
    case FilterExpr::Kind::comparison: {
      auto a = operand_value(e.lhs, row, cols);
      auto b = operand_value(e.rhs, row, cols);
      if (!a || !b) return false;
      TermOrder ord = compare_terms(*a, *b);
      if (!ord.same_kind) return false;
      switch (e.op) {
        case Comparator::lt: return ord.cmp < 0;
        case Comparator::le: return ord.cmp <= 0;
        case Comparator::eq: return ord.cmp == 0;
        case Comparator::ne: return ord.cmp != 0;
        case Comparator::ge: return ord.cmp >= 0;
        case Comparator::gt: return ord.cmp > 0;
      }
      return false;
    }
    case FilterExpr::Kind::logical_and:
      return eval_filter(*e.left, row, cols) && eval_filter(*e.right, row, cols);
    case FilterExpr::Kind::logical_or:
      return eval_filter(*e.left, row, cols) || eval_filter(*e.right, row, cols);
    case FilterExpr::Kind::logical_not:
      return !eval_filter(*e.left, row, cols);
  }
  return false;
}

inline std::optional<Term> compute_aggregate(
    const Projection& p, const std::vector<std::size_t>& members,
    const std::vector<BindingTable::Row>& rows, const VarColumns& cols,
    std::size_t& warnings) {
  const std::size_t* col =
      p.count_star ? nullptr : cols.find(p.variable.name);
  switch (p.fn) {
    case AggregateFn::count: {
      std::size_t n = 0;
      if (p.count_star) {
        n = members.size();
      } else if (col) {
        for (std::size_t i : members)
          if (rows[i][*col]) ++n;
      }
      return Term{Literal{std::to_string(n), vocab::xsd_integer(), ""}};
    }
    case AggregateFn::sum:
    case AggregateFn::avg: {
      Decimal acc;
      std::int64_t n = 0;
      for (std::size_t i : members) {
        if (!col) break;
        const auto& v = rows[i][*col];
        if (!v) continue;
        std::optional<Decimal> d;
        if (is_literal(*v) && term_kind(*v) == TermKind::numeric)
          d = Decimal::parse(as_literal(*v).lexical);
        if (!d) {
          ++warnings;
          continue;
        }
        acc = acc + *d;
        ++n;
      }
      if (p.fn == AggregateFn::avg && n > 0) acc = acc.div_half_even_by(n);
      return Term{Literal{acc.to_lexical(), vocab::xsd_decimal(), ""}};
    }
    case AggregateFn::min:
    case AggregateFn::max: {
      std::optional<Term> best;
      for (std::size_t i : members) {
        if (!col) break;
        const auto& v = rows[i][*col];
        if (!v) continue;
        if (!best) {
          best = *v;
          continue;
        }
        int c = compare_terms(*v, *best).cmp;
        if ((p.fn == AggregateFn::min && c < 0) ||
            (p.fn == AggregateFn::max && c > 0))
          best = *v;
      }
      return best;
    }
  }
  return std::nullopt;
}

}  // namespace detail

// Pipeline: BGP join, FILTER, GROUP BY + aggregates, stable ORDER BY,
// OFFSET/LIMIT, projection, DISTINCT last.
inline Result<BindingTable> evaluate(const Query& q, const store::ReadView& view,
                                     const EvalOptions& opt = {}) {
  using detail::past;
  using detail::timeout_error;
  using Row = BindingTable::Row;

  detail::VarColumns cols;
  std::vector<Row> rows;
  rows.emplace_back();  // the empty solution

  // 1. basic graph pattern, greedy join order
  std::size_t work = 0;
  for (std::size_t idx : plan_bgp(q.where, view)) {
    if (past(opt)) return timeout_error();
    const TriplePattern& pat = q.where[idx];
    struct Slot {
      bool is_var = false;
      std::size_t col = 0;
    };
    Slot slots[3];
    const PatternTerm* parts[3] = {&pat.subject, &pat.predicate, &pat.object};
    for (int k = 0; k < 3; ++k) {
      if (!store::is_bound(*parts[k])) {
        slots[k].is_var = true;
        slots[k].col = cols.get_or_add(store::pattern_var(*parts[k]).name);
      }
    }
    const std::size_t width = cols.names.size();
    std::vector<Row> next;
    for (const Row& row : rows) {
      if (++work % 1024 == 0 && past(opt)) return timeout_error();
      TriplePattern probe = pat;
      PatternTerm* probe_parts[3] = {&probe.subject, &probe.predicate,
                                     &probe.object};
      for (int k = 0; k < 3; ++k) {
        if (!slots[k].is_var) continue;
        if (slots[k].col < row.size() && row[slots[k].col])
          *probe_parts[k] = *row[slots[k].col];
      }
      for (Triple& t : view.match(probe)) {
        if (++work % 1024 == 0 && past(opt)) return timeout_error();
        Row r = row;
        r.resize(width);
        if (slots[0].is_var) r[slots[0].col] = Term{t.subject};
        if (slots[1].is_var) r[slots[1].col] = Term{t.predicate};
        if (slots[2].is_var) r[slots[2].col] = std::move(t.object);
        next.push_back(std::move(r));
      }
    }
    rows = std::move(next);
  }

  // 2. filters
  for (const FilterPtr& f : q.filters) {
    if (past(opt)) return timeout_error();
    std::vector<Row> kept;
    kept.reserve(rows.size());
    for (Row& row : rows) {
      if (++work % 1024 == 0 && past(opt)) return timeout_error();
      if (detail::eval_filter(*f, row, cols)) kept.push_back(std::move(row));
    }
    rows = std::move(kept);
  }

  // 3. grouping and aggregates
  bool has_aggregate = false;
  for (const Projection& p : q.select)
    if (p.is_aggregate) has_aggregate = true;

  BindingTable table;
  if (!q.group_by.empty() || has_aggregate) {
    std::vector<const std::size_t*> key_cols;
    key_cols.reserve(q.group_by.size());
    for (const Var& g : q.group_by) key_cols.push_back(cols.find(g.name));

    std::map<Row, std::vector<std::size_t>, detail::RowLess> groups;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (++work % 1024 == 0 && past(opt)) return timeout_error();
      Row key;
      key.reserve(key_cols.size());
      for (const std::size_t* c : key_cols)
        key.push_back(c && *c < rows[i].size() ? rows[i][*c] : std::nullopt);
      groups[std::move(key)].push_back(i);
    }
    // Whole-query aggregation over zero rows still yields one row.
    if (q.group_by.empty() && groups.empty()) groups.emplace(Row{}, std::vector<std::size_t>{});

    for (const Var& g : q.group_by) table.vars.push_back(g.name);
    for (const Projection& p : q.select)
      if (p.is_aggregate) table.vars.push_back(p.alias.name);

    for (const auto& [key, members] : groups) {
      Row out = key;
      for (const Projection& p : q.select)
        if (p.is_aggregate)
          out.push_back(detail::compute_aggregate(p, members, rows, cols,
                                                  table.aggregate_warnings));
      table.rows.push_back(std::move(out));
    }
  } else {
    table.vars = cols.names;
    table.rows = std::move(rows);
  }

  // 4. stable order
  if (!q.order_by.empty()) {
    if (past(opt)) return timeout_error();
    std::vector<const std::size_t*> key_cols;
    detail::VarColumns out_cols;
    for (const std::string& v : table.vars) out_cols.get_or_add(v);
    for (const OrderKey& k : q.order_by)
      key_cols.push_back(out_cols.find(k.variable.name));
    std::stable_sort(
        table.rows.begin(), table.rows.end(),
        [&](const Row& a, const Row& b) {
          for (std::size_t k = 0; k < q.order_by.size(); ++k) {
            const std::size_t* c = key_cols[k];
            if (!c) continue;
            const auto& av = *c < a.size() ? a[*c] : std::nullopt;
            const auto& bv = *c < b.size() ? b[*c] : std::nullopt;
            int cmp;
            if (!av && !bv) {
              cmp = 0;
            } else if (!av || !bv) {
              cmp = av ? 1 : -1;  // unbound first
            } else {
              cmp = compare_terms(*av, *bv).cmp;
            }
            if (q.order_by[k].descending) cmp = -cmp;
            if (cmp != 0) return cmp < 0;
          }
          return false;
        });
  }

  // 5. offset / limit
  if (q.offset) {
    std::size_t drop = std::min<std::size_t>(*q.offset, table.rows.size());
    table.rows.erase(table.rows.begin(), table.rows.begin() + drop);
  }
  if (q.limit && table.rows.size() > *q.limit) table.rows.resize(*q.limit);

  // 6. projection
  BindingTable projected;
  projected.aggregate_warnings = table.aggregate_warnings;
  std::vector<const std::size_t*> pick;
  detail::VarColumns out_cols;
  for (const std::string& v : table.vars) out_cols.get_or_add(v);
  for (const Projection& p : q.select) {
    const std::string& name = p.is_aggregate ? p.alias.name : p.variable.name;
    projected.vars.push_back(name);
    pick.push_back(out_cols.find(name));
  }
  projected.rows.reserve(table.rows.size());
  for (const Row& row : table.rows) {
    Row out;
    out.reserve(pick.size());
    for (const std::size_t* c : pick)
      out.push_back(c && *c < row.size() ? row[*c] : std::nullopt);
    projected.rows.push_back(std::move(out));
  }

  // 7. distinct
  if (q.distinct) {
    std::set<Row, detail::RowLess> seen;
    std::vector<Row> unique;
    unique.reserve(projected.rows.size());
    for (Row& row : projected.rows) {
      if (seen.insert(row).second) unique.push_back(std::move(row));
    }
    projected.rows = std::move(unique);
  }
  return projected;
}

// ---------------------------------------------------------------------------
// Result serialization

enum class ResultFormat { json, csv };

inline nlohmann::ordered_json results_to_json(const BindingTable& t) {
  nlohmann::ordered_json doc;
  doc["head"]["vars"] = t.vars;
  nlohmann::ordered_json bindings = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json b = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < t.vars.size() && i < row.size(); ++i) {
      if (!row[i]) continue;
      const Term& term = *row[i];
      nlohmann::ordered_json cell;
      if (is_iri(term)) {
        cell["type"] = "uri";
        cell["value"] = as_iri(term).value;
      } else {
        const Literal& lit = as_literal(term);
        cell["type"] = "literal";
        cell["value"] = lit.lexical;
        if (!lit.language.empty())
          cell["xml:lang"] = lit.language;
        else if (!(lit.datatype == vocab::xsd_string()))
          cell["datatype"] = lit.datatype.value;
      }
      b[t.vars[i]] = std::move(cell);
    }
    bindings.push_back(std::move(b));
  }
  doc["results"]["bindings"] = std::move(bindings);
  return doc;
}

namespace detail {

inline std::string csv_escape(const std::string& field) {
  bool needs_quotes = field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

}  // namespace detail

inline std::string serialize_results(const BindingTable& t, ResultFormat format) {
  if (format == ResultFormat::json) return results_to_json(t).dump();
  std::string out;
  for (std::size_t i = 0; i < t.vars.size(); ++i) {
    if (i) out += ",";
    out += detail::csv_escape(t.vars[i]);
  }
  out += "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < t.vars.size(); ++i) {
      if (i) out += ",";
      if (i < row.size() && row[i]) {
        const Term& term = *row[i];
        out += detail::csv_escape(is_iri(term) ? as_iri(term).value
                                               : as_literal(term).lexical);
      }
    }
    out += "\r\n";
  }
  return out;
}

// Rebuilds a binding table from SPARQL results JSON, the inverse of
// results_to_json for the term shapes this engine produces.
inline Result<BindingTable> results_from_json(const std::string& body) {
  nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    return Error{Errc::syntax_error, "invalid SPARQL results JSON"};
  BindingTable t;
  if (!doc.contains("head") || !doc["head"].contains("vars") ||
      !doc["head"]["vars"].is_array())
    return Error{Errc::syntax_error, "results JSON lacks head.vars"};
  for (const auto& v : doc["head"]["vars"]) {
    if (!v.is_string())
      return Error{Errc::syntax_error, "head.vars entries must be strings"};
    t.vars.push_back(v.get<std::string>());
  }
  if (!doc.contains("results") || !doc["results"].contains("bindings") ||
      !doc["results"]["bindings"].is_array())
    return Error{Errc::syntax_error, "results JSON lacks results.bindings"};
  for (const auto& b : doc["results"]["bindings"]) {
    if (!b.is_object())
      return Error{Errc::syntax_error, "bindings entries must be objects"};
    BindingTable::Row row(t.vars.size());
    for (std::size_t i = 0; i < t.vars.size(); ++i) {
      if (!b.contains(t.vars[i])) continue;
      const auto& cell = b[t.vars[i]];
      if (!cell.is_object() || !cell.contains("type") || !cell.contains("value"))
        return Error{Errc::syntax_error, "malformed binding cell"};
      std::string type = cell["type"].get<std::string>();
      std::string value = cell["value"].get<std::string>();
      if (type == "uri") {
        auto iri = validate_iri(value);
        if (!iri.ok()) return iri.error();
        row[i] = Term{std::move(iri).value()};
      } else if (type == "literal") {
        if (cell.contains("xml:lang")) {
          auto lit = make_lang_literal(value, cell["xml:lang"].get<std::string>());
          if (!lit.ok()) return lit.error();
          row[i] = Term{std::move(lit).value()};
        } else if (cell.contains("datatype")) {
          auto dt = validate_iri(cell["datatype"].get<std::string>());
          if (!dt.ok()) return dt.error();
          auto lit = make_typed_literal(value, std::move(dt).value());
          if (!lit.ok()) return lit.error();
          row[i] = Term{std::move(lit).value()};
        } else {
          row[i] = Term{string_literal(value)};
        }
      } else {
        return Error{Errc::syntax_error,
                     "unsupported binding type '" + type + "'"};
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace cakg::sparql
