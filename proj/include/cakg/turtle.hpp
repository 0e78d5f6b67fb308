#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cakg/rdf.hpp"
#include "cakg/result.hpp"

namespace cakg::turtle {

enum class Format { turtle, ntriples };

struct SerializationConfig {
  PrefixMap prefixes;
  bool sort_output = true;
  bool group_by_subject = true;
};

// ---------------------------------------------------------------------------
// Serialization

inline std::string escape_literal(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string term_to_ntriples(const Term& t) {
  if (is_iri(t)) return "<" + as_iri(t).value + ">";
  const Literal& lit = as_literal(t);
  std::string out = "\"" + escape_literal(lit.lexical) + "\"";
  if (!lit.language.empty()) {
    out += "@" + lit.language;
  } else if (lit.datatype != vocab::xsd_string()) {
    out += "^^<" + lit.datatype.value + ">";
  }
  return out;
}

inline std::string triple_to_ntriples(const Triple& t) {
  return "<" + t.subject.value + "> <" + t.predicate.value + "> " +
         term_to_ntriples(t.object) + " .";
}

inline std::string serialize_ntriples(const std::set<Triple>& triples,
                                      bool sort_output = true) {
  std::vector<std::string> lines;
  lines.reserve(triples.size());
  for (const Triple& t : triples) lines.push_back(triple_to_ntriples(t));
  if (sort_output) std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

namespace detail {

// ASCII core of the PN_LOCAL grammar: letters, digits, '_', '-', dots in the
// middle. Empty locals are allowed (the prefix alone names its namespace).
inline bool pname_local_safe(std::string_view local) {
  if (local.empty()) return true;
  auto head = [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
           (c >= '0' && c <= '9') || c == '_';
  };
  auto tail = [&](char c) { return head(c) || c == '-' || c == '.'; };
  if (!head(local.front())) return false;
  if (local.back() == '.') return false;
  for (char c : local.substr(1))
    if (!tail(c)) return false;
  return true;
}

// Longest-namespace abbreviation, or the full <...> form.
inline std::string iri_to_turtle(const Iri& iri, const PrefixMap& prefixes) {
  const std::string* best_label = nullptr;
  std::size_t best_len = 0;
  for (const auto& [label, ns] : prefixes.entries()) {
    if (ns.value.size() < best_len) continue;
    if (iri.value.rfind(ns.value, 0) != 0) continue;
    std::string_view local = std::string_view(iri.value).substr(ns.value.size());
    if (!pname_local_safe(local)) continue;
    if (!best_label || ns.value.size() > best_len) {
      best_label = &label;
      best_len = ns.value.size();
    }
  }
  if (!best_label) return "<" + iri.value + ">";
  return *best_label + ":" + iri.value.substr(best_len);
}

inline std::string term_to_turtle(const Term& t, const PrefixMap& prefixes) {
  if (is_iri(t)) return iri_to_turtle(as_iri(t), prefixes);
  const Literal& lit = as_literal(t);
  std::string out = "\"" + escape_literal(lit.lexical) + "\"";
  if (!lit.language.empty()) {
    out += "@" + lit.language;
  } else if (lit.datatype != vocab::xsd_string()) {
    out += "^^" + iri_to_turtle(lit.datatype, prefixes);
  }
  return out;
}

}  // namespace detail

// Sorted, subject-grouped Turtle. Literals always carry explicit datatypes
// (never numeric shorthand) so a reparse reproduces the exact term set.
inline std::string serialize_turtle(const std::set<Triple>& triples,
                                    const SerializationConfig& config) {
  std::string out;
  for (const auto& [label, ns] : config.prefixes.entries())
    out += "@prefix " + label + ": <" + ns.value + "> .\n";
  if (triples.empty()) return out;

  if (!config.group_by_subject) {
    std::vector<std::string> lines;
    for (const Triple& t : triples) {
      std::string pred = t.predicate == vocab::rdf_type()
                             ? "a"
                             : detail::iri_to_turtle(t.predicate, config.prefixes);
      lines.push_back(detail::iri_to_turtle(t.subject, config.prefixes) + " " +
                      pred + " " +
                      detail::term_to_turtle(t.object, config.prefixes) + " .");
    }
    if (config.sort_output) std::sort(lines.begin(), lines.end());
    out += '\n';
    for (const auto& l : lines) {
      out += l;
      out += '\n';
    }
    return out;
  }

  // subject -> predicate -> objects, rdf:type first within each subject
  std::map<Iri, std::map<Iri, std::vector<Term>>> grouped;
  for (const Triple& t : triples)
    grouped[t.subject][t.predicate].push_back(t.object);

  for (auto& [subject, preds] : grouped) {
    out += '\n';
    out += detail::iri_to_turtle(subject, config.prefixes);
    bool first = true;
    auto emit_pred = [&](const Iri& pred, std::vector<Term>& objects) {
      if (first) {
        out += ' ';
        first = false;
      } else {
        out += " ;\n    ";
      }
      out += pred == vocab::rdf_type()
                 ? "a"
                 : detail::iri_to_turtle(pred, config.prefixes);
      std::sort(objects.begin(), objects.end(), term_less);
      for (std::size_t i = 0; i < objects.size(); ++i) {
        out += i == 0 ? " " : ", ";
        out += detail::term_to_turtle(objects[i], config.prefixes);
      }
    };
    if (auto it = preds.find(vocab::rdf_type()); it != preds.end())
      emit_pred(it->first, it->second);
    for (auto& [pred, objects] : preds) {
      if (pred == vocab::rdf_type()) continue;
      emit_pred(pred, objects);
    }
    out += " .\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

struct Token {
  enum class Kind {
    eof,
    iriref,     // text between < >
    pname,      // full prefixed-name text, contains ':'
    string,     // decoded string value
    at_word,    // word after '@' (prefix directive or language tag)
    caret_caret,
    keyword_a,
    dot,
    semicolon,
    comma,
    integer,    // lexical as written
    decimal,    // lexical as written
  };
  Kind kind;
  std::string text;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view input) : in_(input) {}

  Result<Token> next() {
    skip_ws_and_comments();
    Token tok;
    tok.line = line_;
    tok.column = col_;
    if (eof()) {
      tok.kind = Token::Kind::eof;
      return tok;
    }
    char c = peek();
    if (c == '<') return lex_iriref(tok);
    if (c == '"') return lex_string(tok);
    if (c == '@') {
      advance();
      std::string word;
      while (!eof() && (isalnum_ascii(peek()) || peek() == '-')) word += take();
      if (word.empty()) return error(tok, "dangling '@'");
      tok.kind = Token::Kind::at_word;
      tok.text = word;
      return tok;
    }
    if (c == '^') {
      advance();
      if (eof() || peek() != '^') return error(tok, "expected '^^'");
      advance();
      tok.kind = Token::Kind::caret_caret;
      return tok;
    }
    if (c == '.') {
      // distinguish statement dot from a leading-dot decimal (".5")
      if (pos_ + 1 < in_.size() && isdigit_ascii(in_[pos_ + 1]))
        return lex_number(tok);
      advance();
      tok.kind = Token::Kind::dot;
      return tok;
    }
    if (c == ';') {
      advance();
      tok.kind = Token::Kind::semicolon;
      return tok;
    }
    if (c == ',') {
      advance();
      tok.kind = Token::Kind::comma;
      return tok;
    }
    if (c == '+' || c == '-' || isdigit_ascii(c)) return lex_number(tok);
    if (c == '(' || c == '[')
      return error(tok, std::string("'") + c +
                            "' is not supported (no collections or blank nodes)");
    if (isalpha_ascii(c) || c == '_' || c == ':') return lex_pname_or_a(tok);
    return error(tok, std::string("unexpected character '") + c + "'");
  }

 private:
  static bool isdigit_ascii(char c) { return c >= '0' && c <= '9'; }
  static bool isalpha_ascii(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
  }
  static bool isalnum_ascii(char c) { return isdigit_ascii(c) || isalpha_ascii(c); }

  bool eof() const { return pos_ >= in_.size(); }
  char peek() const { return in_[pos_]; }
  char take() {
    char c = in_[pos_];
    advance();
    return c;
  }
  void advance() {
    if (in_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_ws_and_comments() {
    while (!eof()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  Error error(const Token& tok, std::string message) {
    return Error{Errc::syntax_error, std::move(message), tok.line, tok.column};
  }

  Result<Token> lex_iriref(Token tok) {
    advance();  // '<'
    std::string value;
    while (!eof() && peek() != '>' && peek() != '\n') value += take();
    if (eof() || peek() != '>') return error(tok, "unterminated IRI reference");
    advance();
    tok.kind = Token::Kind::iriref;
    tok.text = std::move(value);
    return tok;
  }

  Result<Token> lex_string(Token tok) {
    advance();  // '"'
    std::string value;
    while (true) {
      if (eof() || peek() == '\n') return error(tok, "unterminated string literal");
      char c = take();
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) return error(tok, "unterminated escape sequence");
        char e = take();
        switch (e) {
          case '"': value += '"'; break;
          case '\\': value += '\\'; break;
          case 'n': value += '\n'; break;
          case 'r': value += '\r'; break;
          case 't': value += '\t'; break;
          default:
            return error(tok, std::string("unsupported escape '\\") + e + "'");
        }
      } else {
        value += c;
      }
    }
    tok.kind = Token::Kind::string;
    tok.text = std::move(value);
    return tok;
  }

  Result<Token> lex_number(Token tok) {
    std::string text;
    if (peek() == '+' || peek() == '-') text += take();
    bool any_digit = false;
    while (!eof() && isdigit_ascii(peek())) {
      text += take();
      any_digit = true;
    }
    bool decimal = false;
    if (!eof() && peek() == '.' && pos_ + 1 < in_.size() &&
        isdigit_ascii(in_[pos_ + 1])) {
      decimal = true;
      text += take();
      while (!eof() && isdigit_ascii(peek())) text += take();
      any_digit = true;
    }
    if (!any_digit) return error(tok, "malformed numeric literal");
    tok.kind = decimal ? Token::Kind::decimal : Token::Kind::integer;
    tok.text = std::move(text);
    return tok;
  }

  Result<Token> lex_pname_or_a(Token tok) {
    std::string text;
    auto body = [&](char c) {
      return isalnum_ascii(c) || c == '_' || c == '-' || c == '.';
    };
    while (!eof() && (body(peek()) || peek() == ':')) {
      if (peek() == '.') {
        // a dot ends the name unless followed by another name character
        if (pos_ + 1 >= in_.size() || !body(in_[pos_ + 1]) || in_[pos_ + 1] == '.')
          break;
      }
      text += take();
    }
    if (text == "a") {
      tok.kind = Token::Kind::keyword_a;
      return tok;
    }
    if (text.find(':') == std::string::npos)
      return error(tok, "expected ':' in prefixed name '" + text + "'");
    tok.kind = Token::Kind::pname;
    tok.text = std::move(text);
    return tok;
  }

  std::string_view in_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::string_view input, Format format) : lexer_(input), format_(format) {}

  Result<std::set<Triple>> run() {
    std::set<Triple> out;
    if (auto s = bump(); !s.ok()) return s.error();
    while (cur_.kind != Token::Kind::eof) {
      if (cur_.kind == Token::Kind::at_word) {
        if (format_ == Format::ntriples)
          return err("directives are not allowed in N-Triples");
        if (cur_.text == "prefix") {
          if (auto s = parse_prefix_directive(); !s.ok()) return s.error();
          continue;
        }
        if (cur_.text == "base") return err("@base directive not supported");
        return err("unexpected '@" + cur_.text + "'");
      }
      if (auto s = parse_triples_block(out); !s.ok()) return s.error();
    }
    return out;
  }

 private:
  Status bump() {
    auto t = lexer_.next();
    if (!t.ok()) return t.error();
    cur_ = std::move(t).value();
    return ok_status();
  }

  Error err(std::string message) const {
    return Error{Errc::syntax_error, std::move(message), cur_.line, cur_.column};
  }

  Result<Iri> validated_iri(const std::string& text) const {
    auto r = validate_iri(text);
    if (!r.ok()) {
      Error e = r.error();
      return Error{Errc::syntax_error, "invalid IRI <" + text + ">: " + e.message,
                   cur_.line, cur_.column};
    }
    return r;
  }

  Result<Iri> expanded(const std::string& pname) const {
    auto r = expand_pname(pname, prefixes_);
    if (!r.ok()) {
      Error e = r.error();
      e.line = cur_.line;
      e.column = cur_.column;
      return e;
    }
    return r;
  }

  Status parse_prefix_directive() {
    if (auto s = bump(); !s.ok()) return s;  // past '@prefix'
    if (cur_.kind != Token::Kind::pname || cur_.text.back() != ':')
      return err("expected prefix label after @prefix");
    std::string label = cur_.text.substr(0, cur_.text.size() - 1);
    if (!PrefixMap::valid_label(label))
      return err("invalid prefix label '" + label + "'");
    if (auto s = bump(); !s.ok()) return s;
    if (cur_.kind != Token::Kind::iriref)
      return err("expected namespace IRI after prefix label");
    auto ns = validated_iri(cur_.text);
    if (!ns.ok()) return ns.error();
    if (auto s = bump(); !s.ok()) return s;
    if (cur_.kind != Token::Kind::dot)
      return err("expected '.' after @prefix directive");
    if (auto s = bump(); !s.ok()) return s;
    // Redefinition follows document order: the latest binding wins.
    PrefixMap updated;
    for (const auto& [l, n] : prefixes_.entries())
      if (l != label) (void)updated.add(l, n);
    (void)updated.add(label, std::move(ns).value());
    prefixes_ = std::move(updated);
    return ok_status();
  }

  Result<Iri> parse_iri_term() {
    if (cur_.kind == Token::Kind::iriref) {
      auto iri = validated_iri(cur_.text);
      if (!iri.ok()) return iri.error();
      if (auto s = bump(); !s.ok()) return s.error();
      return iri;
    }
    if (cur_.kind == Token::Kind::pname) {
      if (format_ == Format::ntriples)
        return err("prefixed names are not allowed in N-Triples");
      auto iri = expanded(cur_.text);
      if (!iri.ok()) return iri.error();
      if (auto s = bump(); !s.ok()) return s.error();
      return iri;
    }
    return err("expected an IRI");
  }

  Result<Term> parse_object() {
    if (cur_.kind == Token::Kind::iriref || cur_.kind == Token::Kind::pname) {
      auto iri = parse_iri_term();
      if (!iri.ok()) return iri.error();
      return Term(std::move(iri).value());
    }
    if (cur_.kind == Token::Kind::integer || cur_.kind == Token::Kind::decimal) {
      if (format_ == Format::ntriples)
        return err("numeric shorthand is not allowed in N-Triples");
      Literal lit{cur_.text,
                  cur_.kind == Token::Kind::integer ? vocab::xsd_integer()
                                                    : vocab::xsd_decimal(),
                  ""};
      if (auto s = bump(); !s.ok()) return s.error();
      return Term(std::move(lit));
    }
    if (cur_.kind == Token::Kind::string) {
      std::string lexical = cur_.text;
      int line = cur_.line, column = cur_.column;
      if (auto s = bump(); !s.ok()) return s.error();
      if (cur_.kind == Token::Kind::caret_caret) {
        if (auto s = bump(); !s.ok()) return s.error();
        auto dt = parse_iri_term();
        if (!dt.ok()) return dt.error();
        auto lit = make_typed_literal(std::move(lexical), std::move(dt).value());
        if (!lit.ok())
          return Error{Errc::syntax_error, lit.error().message, line, column};
        return Term(std::move(lit).value());
      }
      if (cur_.kind == Token::Kind::at_word) {
        auto lit = make_lang_literal(std::move(lexical), cur_.text);
        if (!lit.ok())
          return Error{Errc::syntax_error, lit.error().message, cur_.line,
                       cur_.column};
        if (auto s = bump(); !s.ok()) return s.error();
        return Term(std::move(lit).value());
      }
      return Term(string_literal(std::move(lexical)));
    }
    return err("expected an object term");
  }

  Status parse_triples_block(std::set<Triple>& out) {
    auto subject = parse_iri_term();
    if (!subject.ok()) return subject.error();

    while (true) {
      Iri predicate;
      if (cur_.kind == Token::Kind::keyword_a) {
        if (format_ == Format::ntriples)
          return err("'a' is not allowed in N-Triples");
        predicate = vocab::rdf_type();
        if (auto s = bump(); !s.ok()) return s;
      } else {
        auto p = parse_iri_term();
        if (!p.ok()) return p.error();
        predicate = std::move(p).value();
      }

      while (true) {
        auto object = parse_object();
        if (!object.ok()) return object.error();
        out.insert(Triple{subject.value(), predicate, std::move(object).value()});
        if (cur_.kind == Token::Kind::comma) {
          if (format_ == Format::ntriples)
            return err("',' is not allowed in N-Triples");
          if (auto s = bump(); !s.ok()) return s;
          continue;
        }
        break;
      }

      if (cur_.kind == Token::Kind::semicolon) {
        if (format_ == Format::ntriples)
          return err("';' is not allowed in N-Triples");
        if (auto s = bump(); !s.ok()) return s;
        if (cur_.kind == Token::Kind::dot) break;  // trailing ';' before '.'
        continue;
      }
      break;
    }

    if (cur_.kind != Token::Kind::dot) return err("expected '.' after triple");
    return bump();
  }

  Lexer lexer_;
  Format format_;
  Token cur_;
  PrefixMap prefixes_;
};

}  // namespace detail

// Parses the supported Turtle subset (the serializer's grammar plus numeric
// shorthand and comments) or strict N-Triples.
inline Result<std::set<Triple>> parse(std::string_view document, Format format) {
  return detail::Parser(document, format).run();
}

}  // namespace cakg::turtle
