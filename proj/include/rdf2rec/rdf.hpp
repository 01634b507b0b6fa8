#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rdf2rec/common.hpp"

namespace rdf2rec {

inline constexpr std::string_view kRdfType =
    "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view kXsdString =
    "http://www.w3.org/2001/XMLSchema#string";
inline constexpr std::string_view kXsdBoolean =
    "http://www.w3.org/2001/XMLSchema#boolean";
inline constexpr std::string_view kXsdInteger =
    "http://www.w3.org/2001/XMLSchema#integer";
inline constexpr std::string_view kXsdDouble =
    "http://www.w3.org/2001/XMLSchema#double";
inline constexpr std::string_view kXsdDateTime =
    "http://www.w3.org/2001/XMLSchema#dateTime";
inline constexpr std::string_view kXsdDate =
    "http://www.w3.org/2001/XMLSchema#date";
inline constexpr std::string_view kXsdGYear =
    "http://www.w3.org/2001/XMLSchema#gYear";

enum class TermKind { IRI, BlankNode, Literal };

struct TermValue {
  TermKind kind = TermKind::IRI;
  std::string lexical;       // IRI text, blank label without "_:", or literal value
  std::string datatype;      // empty when absent
  std::string language_tag;  // empty when absent

  static TermValue iri(std::string v) {
    return TermValue{TermKind::IRI, std::move(v), {}, {}};
  }
  static TermValue blank(std::string label) {
    return TermValue{TermKind::BlankNode, std::move(label), {}, {}};
  }
  static TermValue literal(std::string lex, std::string dt = {}, std::string lang = {}) {
    return TermValue{TermKind::Literal, std::move(lex), std::move(dt), std::move(lang)};
  }

  bool is_resource() const { return kind != TermKind::Literal; }

  // Plain literals carry the string datatype implicitly.
  std::string_view effective_datatype() const {
    if (kind != TermKind::Literal) return {};
    if (!datatype.empty()) return datatype;
    return kXsdString;
  }

  // Store-scoped node identity: IRIs as-is, blank nodes prefixed.
  std::string node_id() const {
    if (kind == TermKind::BlankNode) return "_:" + lexical;
    return lexical;
  }

  friend bool operator==(const TermValue&, const TermValue&) = default;
};

struct Triple {
  TermValue subject;
  TermValue predicate;
  TermValue object;
  friend bool operator==(const Triple&, const Triple&) = default;
};

struct PredicateStats {
  long object_count = 0;   // occurrences with IRI/blank-node objects
  long literal_count = 0;  // occurrences with literal objects
};

enum class PredicateClass { ObjectProperty, DatatypeProperty, Mixed };

enum class ParseMode { Strict, Lenient };

struct ParseIssue {
  int line = 0;
  int column = 0;
  std::string message;
};

class TripleStore {
 public:
  void add(Triple t) {
    const std::string& p = t.predicate.lexical;
    by_predicate_[p].push_back(triples_.size());
    auto& st = stats_[p];
    if (t.object.kind == TermKind::Literal)
      ++st.literal_count;
    else
      ++st.object_count;
    triples_.push_back(std::move(t));
  }

  const std::vector<Triple>& triples() const { return triples_; }
  size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }

  const std::map<std::string, std::vector<size_t>>& by_predicate() const {
    return by_predicate_;
  }
  const std::map<std::string, PredicateStats>& stats() const { return stats_; }

  // Line accounting from the parse that produced this store.
  long total_lines = 0;
  long comment_or_blank_lines = 0;
  std::vector<ParseIssue> skipped;  // lenient mode only

  bool same_triples(const TripleStore& other) const {
    return triples_ == other.triples_;
  }

 private:
  std::vector<Triple> triples_;
  std::map<std::string, std::vector<size_t>> by_predicate_;
  std::map<std::string, PredicateStats> stats_;
};

namespace detail {

inline void append_utf8(std::string& out, uint32_t cp) {
  if (cp <= 0x7f) {
    out.push_back(static_cast<char>(cp));
  } else if (cp <= 0x7ff) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp <= 0xffff) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

// Cursor over one physical line.
struct LineCursor {
  std::string_view s;
  size_t pos = 0;
  int line = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(line, static_cast<int>(pos) + 1, msg);
  }
  bool eol() const { return pos >= s.size(); }
  char peek() const { return eol() ? '\0' : s[pos]; }
  char take() { return s[pos++]; }
  void skip_ws() {
    while (!eol() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool require_ws() {
    size_t before = pos;
    skip_ws();
    return pos > before;
  }

  uint32_t take_hex(int digits) {
    uint32_t v = 0;
    for (int i = 0; i < digits; ++i) {
      if (eol()) fail("truncated \\u escape");
      char c = take();
      v <<= 4;
      if (c >= '0' && c <= '9')
        v |= static_cast<uint32_t>(c - '0');
      else if (c >= 'a' && c <= 'f')
        v |= static_cast<uint32_t>(c - 'a' + 10);
      else if (c >= 'A' && c <= 'F')
        v |= static_cast<uint32_t>(c - 'A' + 10);
      else
        fail("invalid hex digit in unicode escape");
    }
    return v;
  }

  // Decodes one escape sequence after the backslash has been consumed.
  void take_escape(std::string& out) {
    if (eol()) fail("dangling backslash");
    char c = take();
    switch (c) {
      case 't': out.push_back('\t'); break;
      case 'b': out.push_back('\b'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case 'f': out.push_back('\f'); break;
      case '"': out.push_back('"'); break;
      case '\'': out.push_back('\''); break;
      case '\\': out.push_back('\\'); break;
      case 'u': append_utf8(out, take_hex(4)); break;
      case 'U': append_utf8(out, take_hex(8)); break;
      default: fail(std::string("unknown escape \\") + c);
    }
  }

  TermValue take_iri() {
    if (take() != '<') fail("expected '<'");
    std::string out;
    while (true) {
      if (eol()) fail("unterminated IRI");
      char c = take();
      if (c == '>') break;
      if (c == '\\') {
        char e = peek();
        if (e == 'u' || e == 'U') {
          take();
          append_utf8(out, take_hex(e == 'u' ? 4 : 8));
          continue;
        }
        fail("invalid escape in IRI");
      }
      if (c == '<' || c == '"' || c == ' ' || c == '\t' ||
          static_cast<unsigned char>(c) < 0x20)
        fail("invalid character in IRI");
      out.push_back(c);
    }
    if (out.empty()) fail("empty IRI");
    if (out.find(':') == std::string::npos) fail("IRI is not absolute: <" + out + ">");
    return TermValue::iri(std::move(out));
  }

  static bool label_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
  }

  TermValue take_blank() {
    take();  // '_'
    if (eol() || take() != ':') fail("expected ':' after '_' in blank node");
    std::string label;
    while (!eol() && label_char(peek())) label.push_back(take());
    if (label.empty()) fail("empty blank node label");
    if (label.back() == '.') {  // trailing '.' belongs to the statement terminator
      label.pop_back();
      --pos;
      if (label.empty()) fail("empty blank node label");
    }
    return TermValue::blank(std::move(label));
  }

  TermValue take_literal() {
    take();  // '"'
    std::string lex;
    while (true) {
      if (eol()) fail("unterminated string literal");
      char c = take();
      if (c == '"') break;
      if (c == '\\') {
        take_escape(lex);
        continue;
      }
      lex.push_back(c);
    }
    if (peek() == '@') {
      take();
      std::string lang;
      while (!eol() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-'))
        lang.push_back(take());
      if (lang.empty()) fail("empty language tag");
      return TermValue::literal(std::move(lex), {}, std::move(lang));
    }
    if (peek() == '^') {
      take();
      if (eol() || take() != '^') fail("expected '^^' before datatype IRI");
      if (peek() != '<') fail("expected datatype IRI");
      TermValue dt = take_iri();
      return TermValue::literal(std::move(lex), std::move(dt.lexical));
    }
    return TermValue::literal(std::move(lex));
  }

  TermValue take_subject() {
    skip_ws();
    if (eol()) fail("expected subject");
    char c = peek();
    if (c == '<') return take_iri();
    if (c == '_') return take_blank();
    fail("subject must be an IRI or blank node");
  }

  TermValue take_predicate() {
    if (!require_ws()) fail("expected whitespace before predicate");
    if (eol()) fail("expected predicate");
    if (peek() != '<') fail("predicate must be an IRI");
    return take_iri();
  }

  TermValue take_object() {
    if (!require_ws()) fail("expected whitespace before object");
    if (eol()) fail("expected object");
    char c = peek();
    if (c == '<') return take_iri();
    if (c == '_') return take_blank();
    if (c == '"') return take_literal();
    fail("object must be an IRI, blank node, or literal");
  }

  void take_terminator() {
    skip_ws();
    if (eol() || take() != '.') fail("expected '.' statement terminator");
    skip_ws();
    if (!eol() && peek() != '#') fail("unexpected content after '.'");
  }
};

}  // namespace detail

// Parses UTF-8 N-Triples, one statement / comment / blank per line. Strict
// mode throws ParseError at the first malformed line; lenient mode skips the
// line and records it in store.skipped.
inline TripleStore parse_ntriples(std::istream& in, ParseMode mode = ParseMode::Strict) {
  TripleStore store;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') {
      ++store.comment_or_blank_lines;
      continue;
    }
    detail::LineCursor cur{line, 0, lineno};
    try {
      Triple t;
      t.subject = cur.take_subject();
      t.predicate = cur.take_predicate();
      t.object = cur.take_object();
      cur.take_terminator();
      store.add(std::move(t));
    } catch (const ParseError& e) {
      if (mode == ParseMode::Strict) throw;
      store.skipped.push_back({e.line, e.column, e.what()});
    }
  }
  store.total_lines = lineno;
  return store;
}

inline TripleStore parse_ntriples(const std::string& text, ParseMode mode = ParseMode::Strict) {
  std::istringstream in(text);
  return parse_ntriples(in, mode);
}

// A pure function of the multiset of (predicate, object kind) pairs.
inline std::map<std::string, PredicateClass> classify_predicates(const TripleStore& store) {
  std::map<std::string, PredicateClass> out;
  for (const auto& [iri, st] : store.stats()) {
    PredicateClass c;
    if (st.object_count > 0 && st.literal_count > 0)
      c = PredicateClass::Mixed;
    else if (st.literal_count > 0)
      c = PredicateClass::DatatypeProperty;
    else
      c = PredicateClass::ObjectProperty;
    out.emplace(iri, c);
  }
  return out;
}

namespace detail {

inline void escape_literal(std::string_view s, std::string& out) {
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04X", c);
          out += buf;
        } else {
          out.push_back(static_cast<char>(c));
        }
    }
  }
}

}  // namespace detail

inline void write_term(const TermValue& t, std::string& out) {
  switch (t.kind) {
    case TermKind::IRI:
      out.push_back('<');
      out += t.lexical;
      out.push_back('>');
      break;
    case TermKind::BlankNode:
      out += "_:";
      out += t.lexical;
      break;
    case TermKind::Literal:
      out.push_back('"');
      detail::escape_literal(t.lexical, out);
      out.push_back('"');
      if (!t.language_tag.empty()) {
        out.push_back('@');
        out += t.language_tag;
      } else if (!t.datatype.empty()) {
        out += "^^<";
        out += t.datatype;
        out.push_back('>');
      }
      break;
  }
}

// Canonical N-Triples: single spaces, " ." terminator, LF line endings.
// parse(serialize(s)) reproduces s triple-for-triple.
inline void serialize_ntriples(const TripleStore& store, std::ostream& out) {
  std::string buf;
  for (const Triple& t : store.triples()) {
    buf.clear();
    write_term(t.subject, buf);
    buf.push_back(' ');
    write_term(t.predicate, buf);
    buf.push_back(' ');
    write_term(t.object, buf);
    buf += " .\n";
    out << buf;
  }
}

inline std::string serialize_ntriples(const TripleStore& store) {
  std::ostringstream out;
  serialize_ntriples(store, out);
  return out.str();
}

}  // namespace rdf2rec
