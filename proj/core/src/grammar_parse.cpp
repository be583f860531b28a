#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "synthcity/errors.hpp"
#include "synthcity/grammar.hpp"

namespace synthcity {

namespace {

// ---------------------------------------------------------------------------
// Lexer

struct Token {
  enum class Kind {
    ident,
    number,
    arrow,
    lparen,
    rparen,
    lbrace,
    rbrace,
    colon,
    comma,
    tilde,
    percent,
    equals,
    eof
  };
  Kind kind = Kind::eof;
  std::string text;
  double num = 0.0;
  int line = 0;
  int col = 0;
};

[[noreturn]] void fail_at(int line, int col, const std::string& msg) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "SyntaxError: line %d, col %d: %s", line,
                col, msg.c_str());
  throw Error(Errc::syntax_error, buf);
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (src[i + k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) ||
              src[j] == '_'))
        ++j;
      t.kind = Token::Kind::ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    bool neg_number = c == '-' && i + 1 < src.size() &&
                      (std::isdigit(static_cast<unsigned char>(src[i + 1])) ||
                       src[i + 1] == '.');
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
        neg_number) {
      size_t j = i + (neg_number ? 1 : 0);
      bool seen_dot = false, seen_exp = false;
      while (j < src.size()) {
        char d = src[j];
        if (std::isdigit(static_cast<unsigned char>(d))) {
          ++j;
        } else if (d == '.' && !seen_dot && !seen_exp) {
          seen_dot = true;
          ++j;
        } else if ((d == 'e' || d == 'E') && !seen_exp && j + 1 < src.size() &&
                   (std::isdigit(static_cast<unsigned char>(src[j + 1])) ||
                    ((src[j + 1] == '+' || src[j + 1] == '-') &&
                     j + 2 < src.size() &&
                     std::isdigit(static_cast<unsigned char>(src[j + 2]))))) {
          seen_exp = true;
          j += (src[j + 1] == '+' || src[j + 1] == '-') ? 2 : 1;
        } else {
          break;
        }
      }
      t.kind = Token::Kind::number;
      t.text = std::string(src.substr(i, j - i));
      auto res =
          std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.num);
      if (res.ec != std::errc{} || res.ptr != t.text.data() + t.text.size())
        fail_at(line, col, "malformed number '" + t.text + "'");
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (c == '-') {
      if (src.substr(i).starts_with("-->")) {
        t.kind = Token::Kind::arrow;
        t.text = "-->";
        advance(3);
        out.push_back(std::move(t));
        continue;
      }
      fail_at(line, col, "stray '-'");
    }
    switch (c) {
      case '(': t.kind = Token::Kind::lparen; break;
      case ')': t.kind = Token::Kind::rparen; break;
      case '{': t.kind = Token::Kind::lbrace; break;
      case '}': t.kind = Token::Kind::rbrace; break;
      case ':': t.kind = Token::Kind::colon; break;
      case ',': t.kind = Token::Kind::comma; break;
      case '~': t.kind = Token::Kind::tilde; break;
      case '%': t.kind = Token::Kind::percent; break;
      case '=': t.kind = Token::Kind::equals; break;
      default:
        fail_at(line, col, std::string("unexpected character '") + c + "'");
    }
    t.text = std::string(1, c);
    advance(1);
    out.push_back(std::move(t));
  }
  Token eof;
  eof.kind = Token::Kind::eof;
  eof.line = line;
  eof.col = col;
  out.push_back(eof);
  return out;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  GrammarProgram run() {
    GrammarProgram prog;
    while (peek().kind != Token::Kind::eof) {
      const Token& t = peek();
      if (t.kind != Token::Kind::ident)
        fail_at(t.line, t.col, "expected a declaration or rule");
      if (t.text == "attr") {
        parse_attr(prog);
      } else if (t.text == "terminal") {
        parse_terminal(prog);
      } else {
        parse_rule(prog);
      }
    }
    return prog;
  }

 private:
  const Token& peek(size_t ahead = 0) const {
    size_t k = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[k];
  }
  const Token& take() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  const Token& expect(Token::Kind kind, const char* what) {
    const Token& t = take();
    if (t.kind != kind)
      fail_at(t.line, t.col,
              std::string("expected ") + what + ", got '" +
                  (t.kind == Token::Kind::eof ? "<eof>" : t.text) + "'");
    return t;
  }
  std::string expect_ident(const char* what) {
    return expect(Token::Kind::ident, what).text;
  }

  void check_fresh_symbol(const GrammarProgram& prog, const std::string& name,
                          const Token& at) const {
    if (name == "NIL") fail_at(at.line, at.col, "NIL is reserved");
    if (name == "attr" || name == "terminal")
      fail_at(at.line, at.col, "'" + name + "' is a keyword");
    if (prog.rules.count(name))
      fail_at(at.line, at.col, "duplicate definition of '" + name + "'");
    if (prog.terminals.count(name))
      fail_at(at.line, at.col, "'" + name + "' is already a terminal");
  }

  Expr parse_expr() {
    const Token& t = take();
    if (t.kind == Token::Kind::number) return Expr::lit(t.num);
    if (t.kind != Token::Kind::ident)
      fail_at(t.line, t.col, "expected a number, attribute, or rand(a, b)");
    if (t.text == "rand") {
      expect(Token::Kind::lparen, "'('");
      Expr e;
      e.kind = Expr::Kind::random_range;
      e.lo = expect(Token::Kind::number, "a number").num;
      expect(Token::Kind::comma, "','");
      e.hi = expect(Token::Kind::number, "a number").num;
      if (e.hi < e.lo) fail_at(t.line, t.col, "rand(a, b) needs a <= b");
      expect(Token::Kind::rparen, "')'");
      return e;
    }
    Expr e;
    e.kind = Expr::Kind::attr_ref;
    e.name = t.text;
    return e;
  }

  void parse_attr(GrammarProgram& prog) {
    take();  // 'attr'
    const Token& name_tok = peek();
    std::string name = expect_ident("an attribute name");
    for (const AttrDecl& a : prog.attrs)
      if (a.name == name)
        fail_at(name_tok.line, name_tok.col,
                "duplicate attribute '" + name + "'");
    expect(Token::Kind::equals, "'='");
    prog.attrs.push_back({name, parse_expr()});
  }

  void parse_terminal(GrammarProgram& prog) {
    take();  // 'terminal'
    const Token& name_tok = peek();
    std::string name = expect_ident("a terminal name");
    check_fresh_symbol(prog, name, name_tok);
    SemanticClass cls = SemanticClass::Building;
    if (peek().kind == Token::Kind::colon) {
      take();
      const Token& cls_tok = peek();
      std::string cname = expect_ident("a semantic class");
      if (auto c = semantic_class_from_name(cname)) {
        cls = *c;
      } else {
        fail_at(cls_tok.line, cls_tok.col,
                "unknown semantic class '" + cname + "'");
      }
    }
    prog.terminals.emplace(std::move(name), cls);
  }

  bool at_weight_marker() const {
    return peek().kind == Token::Kind::number &&
           peek(1).kind == Token::Kind::percent;
  }
  bool at_statement_boundary() const {
    const Token& t = peek();
    if (t.kind == Token::Kind::eof) return true;
    if (t.kind != Token::Kind::ident) return false;
    if (t.text == "attr" || t.text == "terminal") return true;
    return peek(1).kind == Token::Kind::arrow;
  }

  Op parse_op(const std::string& name, const Token& at) {
    Op op;
    if (name == "extrude" || name == "setback") {
      op.kind = name == "extrude" ? Op::Kind::extrude : Op::Kind::setback;
      expect(Token::Kind::lparen, "'('");
      op.args.push_back(parse_expr());
      expect(Token::Kind::rparen, "')'");
      return op;
    }
    if (name == "color") {
      op.kind = Op::Kind::color;
      expect(Token::Kind::lparen, "'('");
      for (int k = 0; k < 3; ++k) {
        if (k) expect(Token::Kind::comma, "','");
        op.args.push_back(parse_expr());
      }
      expect(Token::Kind::rparen, "')'");
      return op;
    }
    if (name == "texture") {
      op.kind = Op::Kind::texture;
      expect(Token::Kind::lparen, "'('");
      op.texture_name = expect_ident("a palette entry name");
      expect(Token::Kind::rparen, "')'");
      return op;
    }
    if (name == "roof") {
      op.kind = Op::Kind::roof;
      expect(Token::Kind::lparen, "'('");
      const Token& kind_tok = peek();
      std::string kind = expect_ident("a roof kind");
      if (kind == "flat") {
        op.roof_kind = RoofKind::flat;
      } else if (kind == "gable") {
        op.roof_kind = RoofKind::gable;
      } else if (kind == "hip") {
        op.roof_kind = RoofKind::hip;
      } else {
        fail_at(kind_tok.line, kind_tok.col,
                "unknown roof kind '" + kind + "'");
      }
      if (peek().kind == Token::Kind::comma) {
        take();
        op.args.push_back(parse_expr());
      }
      expect(Token::Kind::rparen, "')'");
      return op;
    }
    if (name == "split") {
      op.kind = Op::Kind::split;
      expect(Token::Kind::lparen, "'('");
      const Token& axis_tok = peek();
      std::string axis = expect_ident("an axis (x, y, or z)");
      if (axis == "x") {
        op.axis = SplitAxis::x;
      } else if (axis == "y") {
        op.axis = SplitAxis::y;
      } else if (axis == "z") {
        op.axis = SplitAxis::z;
      } else {
        fail_at(axis_tok.line, axis_tok.col,
                "unknown split axis '" + axis + "'");
      }
      expect(Token::Kind::rparen, "')'");
      expect(Token::Kind::lbrace, "'{'");
      while (peek().kind != Token::Kind::rbrace) {
        SplitPart part;
        if (peek().kind == Token::Kind::tilde) {
          take();
          part.relative = true;
        }
        part.size = parse_expr();
        expect(Token::Kind::colon, "':'");
        part.symbol = expect_ident("a symbol");
        op.parts.push_back(std::move(part));
        if (peek().kind == Token::Kind::comma) take();
      }
      take();  // '}'
      if (op.parts.empty())
        fail_at(at.line, at.col, "split needs at least one part");
      return op;
    }
    if (name == "comp") {
      op.kind = Op::Kind::comp;
      expect(Token::Kind::lparen, "'('");
      const Token& sel_tok = peek();
      if (expect_ident("'faces'") != "faces")
        fail_at(sel_tok.line, sel_tok.col, "comp selects 'faces'");
      expect(Token::Kind::rparen, "')'");
      expect(Token::Kind::lbrace, "'{'");
      while (peek().kind != Token::Kind::rbrace) {
        const Token& face_tok = peek();
        std::string face = expect_ident("a face selector");
        CompFace cf;
        if (face == "top") {
          cf = CompFace::top;
        } else if (face == "side") {
          cf = CompFace::side;
        } else if (face == "bottom") {
          cf = CompFace::bottom;
        } else {
          fail_at(face_tok.line, face_tok.col,
                  "unknown face selector '" + face + "'");
        }
        if (op.faces.count(cf))
          fail_at(face_tok.line, face_tok.col,
                  "duplicate face selector '" + face + "'");
        expect(Token::Kind::colon, "':'");
        op.faces[cf] = expect_ident("a symbol");
        if (peek().kind == Token::Kind::comma) take();
      }
      take();  // '}'
      if (op.faces.empty())
        fail_at(at.line, at.col, "comp needs at least one face");
      return op;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "UnknownOperation: line %d, col %d: '%s' is not a built-in",
                  at.line, at.col, name.c_str());
    throw Error(Errc::unknown_operation, buf);
  }

  std::vector<Item> parse_items() {
    std::vector<Item> items;
    const Token* consuming = nullptr;
    std::string consuming_name;
    while (!at_statement_boundary() && !at_weight_marker()) {
      const Token& t = peek();
      if (t.kind != Token::Kind::ident)
        fail_at(t.line, t.col, "expected an operation or symbol");
      if (consuming)
        fail_at(consuming->line, consuming->col,
                consuming_name + " must be the final item of a successor");
      take();
      Item item;
      if (peek().kind == Token::Kind::lparen) {
        item.is_op = true;
        item.op = parse_op(t.text, t);
        if (item.op.kind == Op::Kind::split ||
            item.op.kind == Op::Kind::comp ||
            item.op.kind == Op::Kind::roof) {
          consuming = &t;
          consuming_name = t.text;
        }
      } else {
        item.symbol = t.text;
      }
      items.push_back(std::move(item));
    }
    if (items.empty()) {
      const Token& t = peek();
      fail_at(t.line, t.col, "empty successor");
    }
    return items;
  }

  void parse_rule(GrammarProgram& prog) {
    const Token& name_tok = peek();
    std::string name = expect_ident("a rule name");
    check_fresh_symbol(prog, name, name_tok);
    expect(Token::Kind::arrow, "'-->'");

    Rule rule;
    rule.predecessor = name;
    if (at_weight_marker()) {
      double total = 0.0;
      while (at_weight_marker()) {
        const Token& w_tok = take();  // number
        take();                       // '%'
        expect(Token::Kind::colon, "':'");
        if (!(w_tok.num > 0.0))
          throw Error(Errc::non_positive_weight,
                      "NonPositiveWeight: stochastic weights must be > 0");
        Successor succ;
        succ.raw_percent = w_tok.num;
        succ.items = parse_items();
        total += w_tok.num;
        rule.successors.push_back(std::move(succ));
      }
      for (Successor& s : rule.successors) s.weight = s.raw_percent / total;
    } else {
      Successor succ;
      succ.weight = 1.0;
      succ.items = parse_items();
      rule.successors.push_back(std::move(succ));
    }
    prog.rules.emplace(std::move(name), std::move(rule));
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

std::string fmt_num(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void print_expr(std::string& out, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::literal:
      out += fmt_num(e.value);
      break;
    case Expr::Kind::attr_ref:
      out += e.name;
      break;
    case Expr::Kind::random_range:
      out += "rand(" + fmt_num(e.lo) + ", " + fmt_num(e.hi) + ")";
      break;
  }
}

void print_op(std::string& out, const Op& op) {
  switch (op.kind) {
    case Op::Kind::extrude:
    case Op::Kind::setback:
      out += op.kind == Op::Kind::extrude ? "extrude(" : "setback(";
      print_expr(out, op.args[0]);
      out += ")";
      break;
    case Op::Kind::color:
      out += "color(";
      for (size_t k = 0; k < op.args.size(); ++k) {
        if (k) out += ", ";
        print_expr(out, op.args[k]);
      }
      out += ")";
      break;
    case Op::Kind::texture:
      out += "texture(" + op.texture_name + ")";
      break;
    case Op::Kind::roof: {
      const char* kind = op.roof_kind == RoofKind::flat     ? "flat"
                         : op.roof_kind == RoofKind::gable ? "gable"
                                                           : "hip";
      out += std::string("roof(") + kind;
      if (!op.args.empty()) {
        out += ", ";
        print_expr(out, op.args[0]);
      }
      out += ")";
      break;
    }
    case Op::Kind::split: {
      const char* axis = op.axis == SplitAxis::x   ? "x"
                         : op.axis == SplitAxis::y ? "y"
                                                   : "z";
      out += std::string("split(") + axis + ") { ";
      for (size_t k = 0; k < op.parts.size(); ++k) {
        if (k) out += " ";
        if (op.parts[k].relative) out += "~";
        print_expr(out, op.parts[k].size);
        out += ": " + op.parts[k].symbol;
      }
      out += " }";
      break;
    }
    case Op::Kind::comp: {
      out += "comp(faces) { ";
      bool first = true;
      for (const auto& [face, symbol] : op.faces) {
        if (!first) out += " ";
        first = false;
        out += face == CompFace::top      ? "top"
               : face == CompFace::side   ? "side"
                                          : "bottom";
        out += ": " + symbol;
      }
      out += " }";
      break;
    }
  }
}

}  // namespace

GrammarProgram parse_grammar(std::string_view text) {
  return Parser(text).run();
}

std::string pretty_print(const GrammarProgram& program) {
  std::string out;
  for (const AttrDecl& a : program.attrs) {
    out += "attr " + a.name + " = ";
    print_expr(out, a.value);
    out += "\n";
  }
  for (const auto& [name, cls] : program.terminals)
    out += "terminal " + name + " : " + semantic_class_name(cls) + "\n";
  for (const auto& [name, rule] : program.rules) {
    out += name + " -->";
    for (const Successor& s : rule.successors) {
      if (rule.successors.size() > 1 || s.raw_percent != 0.0)
        out += " " + fmt_num(s.raw_percent) + "%:";
      for (const Item& item : s.items) {
        out += " ";
        if (item.is_op) {
          print_op(out, item.op);
        } else {
          out += item.symbol;
        }
      }
    }
    out += "\n";
  }
  return out;
}

void GrammarProgram::link_check() const {
  auto resolved = [&](const std::string& symbol) {
    return symbol == "NIL" || rules.count(symbol) != 0 ||
           terminals.count(symbol) != 0;
  };
  auto check_expr = [&](const Expr& e, const std::string& where) {
    if (e.kind != Expr::Kind::attr_ref) return;
    for (const AttrDecl& a : attrs)
      if (a.name == e.name) return;
    throw Error(Errc::undefined_symbol, "UndefinedSymbol: attribute '" +
                                            e.name + "' referenced by " +
                                            where + " is not declared");
  };
  for (const auto& [name, rule] : rules) {
    std::string where = "rule '" + name + "'";
    for (const Successor& s : rule.successors) {
      for (const Item& item : s.items) {
        if (!item.is_op) {
          if (!resolved(item.symbol))
            throw Error(Errc::undefined_symbol,
                        "UndefinedSymbol: '" + item.symbol +
                            "' referenced by " + where +
                            " has no rule and is not a terminal");
          continue;
        }
        for (const Expr& e : item.op.args) check_expr(e, where);
        for (const SplitPart& part : item.op.parts) {
          check_expr(part.size, where);
          if (!resolved(part.symbol))
            throw Error(Errc::undefined_symbol,
                        "UndefinedSymbol: split part '" + part.symbol +
                            "' in " + where +
                            " has no rule and is not a terminal");
        }
        for (const auto& [face, symbol] : item.op.faces) {
          (void)face;
          if (!resolved(symbol))
            throw Error(Errc::undefined_symbol,
                        "UndefinedSymbol: comp target '" + symbol + "' in " +
                            where + " has no rule and is not a terminal");
        }
      }
    }
  }
  for (const AttrDecl& a : attrs)
    if (a.value.kind == Expr::Kind::attr_ref)
      check_expr(a.value, "attribute '" + a.name + "'");
}

std::vector<double> apply_split(double scope_len,
                                std::span<const SizeSpec> spec) {
  if (!(scope_len > 0.0))
    throw Error(Errc::invalid_argument, "split scope length must be > 0");
  if (spec.empty())
    throw Error(Errc::invalid_argument, "split needs at least one entry");

  double sum_abs = 0.0, sum_rel = 0.0;
  for (const SizeSpec& s : spec) {
    if (s.relative) {
      if (!(s.value > 0.0))
        throw Error(Errc::non_positive_weight,
                    "NonPositiveWeight: relative split weights must be > 0");
      sum_rel += s.value;
    } else {
      if (s.value < 0.0)
        throw Error(Errc::invalid_argument, "split sizes must be >= 0");
      sum_abs += s.value;
    }
  }
  if (sum_abs > scope_len)
    throw Error(Errc::split_overflow,
                "Overflow: absolute split sizes exceed the scope");
  double residual = scope_len - sum_abs;
  if (residual > 0.0 && sum_rel == 0.0)
    throw Error(Errc::split_underflow,
                "Underflow: leftover scope with no relative entries");

  std::vector<double> out;
  out.reserve(spec.size());
  for (const SizeSpec& s : spec)
    out.push_back(s.relative ? residual * (s.value / sum_rel) : s.value);
  double partial = 0.0;
  for (size_t k = 0; k + 1 < out.size(); ++k) partial += out[k];
  out.back() = scope_len - partial;
  // The final entry absorbs the rounding of the proportional shares, but a
  // left-to-right re-sum rounds once more and can land one ulp off the
  // scope when the subtraction falls on a half-ulp tie. Nudge the tail
  // until the re-sum is bit-exact; if even rounding pushes both neighbours
  // away from the scope, shift the largest earlier entry by one ulp to
  // move the tie off the knife edge and try again.
  for (int attempt = 0; attempt < 16; ++attempt) {
    double sum = partial + out.back();
    if (sum == scope_len) break;
    double nudged = std::nextafter(out.back(), sum < scope_len ? HUGE_VAL : -HUGE_VAL);
    if (partial + nudged == scope_len) {
      out.back() = nudged;
      break;
    }
    size_t big = 0;
    for (size_t k = 1; k + 1 < out.size(); ++k)
      if (out[k] > out[big]) big = k;
    out[big] = std::nextafter(out[big], 0.0);
    partial = 0.0;
    for (size_t k = 0; k + 1 < out.size(); ++k) partial += out[k];
    out.back() = scope_len - partial;
  }
  return out;
}

}  // namespace synthcity
