#include "feh/parser.hpp"

#include <cctype>
#include <unordered_set>
#include <utility>
#include <vector>

namespace feh {

namespace {

using namespace surface;

enum class Tok {
  Ident,
  Keyword,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Semi,
  Colon,
  Dot,
  Eq,
  Arrow,     // ->
  FatArrow,  // =>
  Tilde,
  Slash,
  Eof,
};

struct Token {
  Tok kind;
  std::string text;
  Span span;
};

const std::unordered_set<std::string>& keywords() {
  static const std::unordered_set<std::string> kw = {
      "fun",  "rec",    "let",  "in",   "if",   "then", "else",
      "return", "do",   "with", "handle", "def", "effect", "main",
      "mrec", "and",    "true", "false", "pure", "Unit", "Bool"};
  return kw;
}

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& s) : src(s) {}

  Span here() const { return Span{line, col}; }

  char peek(size_t k = 0) const { return pos + k < src.size() ? src[pos + k] : '\0'; }

  char advance() {
    char c = src[pos++];
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    return c;
  }

  static bool ident_start(char c) { return std::isalpha((unsigned char)c) || c == '_'; }
  static bool ident_tail(char c) {
    return std::isalnum((unsigned char)c) || c == '_' || c == '\'';
  }

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos < src.size()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
        continue;
      }
      if (c == '/' && peek(1) == '/') {
        while (pos < src.size() && peek() != '\n') advance();
        continue;
      }
      Span sp = here();
      if (ident_start(c)) {
        std::string text;
        while (pos < src.size() && ident_tail(peek())) text += advance();
        out.push_back({keywords().count(text) ? Tok::Keyword : Tok::Ident, text, sp});
        continue;
      }
      switch (c) {
        case '(': advance(); out.push_back({Tok::LParen, "(", sp}); break;
        case ')': advance(); out.push_back({Tok::RParen, ")", sp}); break;
        case '{': advance(); out.push_back({Tok::LBrace, "{", sp}); break;
        case '}': advance(); out.push_back({Tok::RBrace, "}", sp}); break;
        case ',': advance(); out.push_back({Tok::Comma, ",", sp}); break;
        case ';': advance(); out.push_back({Tok::Semi, ";", sp}); break;
        case ':': advance(); out.push_back({Tok::Colon, ":", sp}); break;
        case '.': advance(); out.push_back({Tok::Dot, ".", sp}); break;
        case '~': advance(); out.push_back({Tok::Tilde, "~", sp}); break;
        case '/': advance(); out.push_back({Tok::Slash, "/", sp}); break;
        case '-':
          advance();
          if (peek() != '>') throw ParseError("expected '->'", sp);
          advance();
          out.push_back({Tok::Arrow, "->", sp});
          break;
        case '=':
          advance();
          if (peek() == '>') {
            advance();
            out.push_back({Tok::FatArrow, "=>", sp});
          } else {
            out.push_back({Tok::Eq, "=", sp});
          }
          break;
        default:
          throw ParseError(std::string("unsupported character '") + c + "'", sp);
      }
    }
    out.push_back({Tok::Eof, "", here()});
    return out;
  }
};

struct Parser {
  std::vector<Token> toks;
  size_t pos = 0;
  // > 0 while parsing a handler clause body directly (not under parentheses):
  // a ';' followed by a clause head belongs to the handler, not to sequencing.
  int handler_body = 0;

  const Token& peek(size_t k = 0) const {
    return toks[std::min(pos + k, toks.size() - 1)];
  }

  bool clause_follows(size_t i) const {
    auto tk = [&](size_t j) -> const Token& {
      return toks[std::min(i + j, toks.size() - 1)];
    };
    return tk(0).kind == Tok::Ident && tk(1).kind == Tok::LParen &&
           tk(2).kind == Tok::Ident && tk(3).kind == Tok::Semi &&
           tk(4).kind == Tok::Ident && tk(5).kind == Tok::RParen &&
           tk(6).kind == Tok::Arrow;
  }

  const Token& advance() { return toks[pos++]; }

  bool at(Tok k) const { return peek().kind == k; }
  bool at_kw(const char* kw) const {
    return peek().kind == Tok::Keyword && peek().text == kw;
  }

  Token expect(Tok k, const char* what) {
    if (!at(k)) throw ParseError(std::string("expected ") + what, peek().span);
    return advance();
  }

  void expect_kw(const char* kw) {
    if (!at_kw(kw)) throw ParseError(std::string("expected '") + kw + "'", peek().span);
    advance();
  }

  bool eat(Tok k) {
    if (at(k)) {
      advance();
      return true;
    }
    return false;
  }

  bool eat_kw(const char* kw) {
    if (at_kw(kw)) {
      advance();
      return true;
    }
    return false;
  }

  std::string expect_ident(const char* what) {
    if (!at(Tok::Ident)) throw ParseError(std::string("expected ") + what, peek().span);
    return advance().text;
  }

  // ---- types -------------------------------------------------------------

  TypeExprPtr type_atom() {
    Span sp = peek().span;
    if (eat_kw("Unit")) return te_base(false, sp);
    if (eat_kw("Bool")) return te_base(true, sp);
    if (eat(Tok::LParen)) {
      auto t = type_expr();
      expect(Tok::RParen, "')'");
      return t;
    }
    if (eat(Tok::LBrace)) {
      std::vector<std::pair<std::string, TypeExprPtr>> fields;
      if (!eat(Tok::RBrace)) {
        do {
          auto l = expect_ident("record label");
          expect(Tok::Colon, "':'");
          fields.emplace_back(l, type_expr());
        } while (eat(Tok::Comma));
        expect(Tok::RBrace, "'}'");
      }
      return te_record(std::move(fields), sp);
    }
    throw ParseError("expected type", sp);
  }

  TypeExprPtr arrow_head() {
    Span sp = peek().span;
    auto a = type_atom();
    if (eat(Tok::Arrow)) return te_arrow(std::move(a), type_expr(), sp);
    return a;
  }

  TypeExprPtr type_expr() {
    Span sp = peek().span;
    auto t = arrow_head();
    while (eat(Tok::Slash)) {
      if (eat_kw("pure")) {
        t = te_pure(std::move(t), sp);
        continue;
      }
      auto in = type_expr();  // stops naturally before '=>'
      expect(Tok::FatArrow, "'=>'");
      auto out = type_expr();
      t = te_eff(std::move(t), std::move(in), std::move(out), sp);
    }
    return t;
  }

  // ---- binders -----------------------------------------------------------

  BinderExpr binder() {
    Span sp = peek().span;
    if (eat(Tok::LParen)) {
      BinderExpr b;
      b.span = sp;
      b.name = expect_ident("binder name");
      expect(Tok::Colon, "':'");
      b.ann1 = type_expr();
      if (eat(Tok::Tilde)) b.ann2 = type_expr();
      expect(Tok::RParen, "')'");
      return b;
    }
    BinderExpr b;
    b.span = sp;
    b.name = expect_ident("binder name");
    return b;
  }

  // ---- handlers ----------------------------------------------------------

  HandlerExprPtr handler_literal() {
    Span sp = peek().span;
    expect(Tok::LBrace, "'{'");
    expect_kw("return");
    auto h = std::make_shared<HandlerExpr>();
    h->span = sp;
    h->ret_binder = expect_ident("return-clause binder");
    expect(Tok::Arrow, "'->'");
    ++handler_body;
    h->ret_body = seq_expr();
    while (eat(Tok::Semi)) {
      HOpClause cl;
      cl.span = peek().span;
      cl.op = expect_ident("operation name");
      expect(Tok::LParen, "'('");
      cl.arg = expect_ident("operation parameter");
      expect(Tok::Semi, "';'");
      cl.kont = expect_ident("continuation parameter");
      expect(Tok::RParen, "')'");
      expect(Tok::Arrow, "'->'");
      cl.body = seq_expr();
      h->clauses.push_back(std::move(cl));
    }
    --handler_body;
    expect(Tok::RBrace, "'}'");
    return h;
  }

  // ---- expressions -------------------------------------------------------

  bool atom_start() const {
    switch (peek().kind) {
      case Tok::LParen:
      case Tok::LBrace:
      case Tok::Ident:
        return true;
      case Tok::Keyword:
        return peek().text == "true" || peek().text == "false";
      default:
        return false;
    }
  }

  ExprPtr atom() {
    Span sp = peek().span;
    if (at(Tok::Ident)) return mk(EVar{advance().text}, sp);
    if (eat_kw("true")) return mk(EBool{true}, sp);
    if (eat_kw("false")) return mk(EBool{false}, sp);
    if (eat(Tok::LParen)) {
      if (eat(Tok::RParen)) return mk(EUnit{}, sp);
      int saved = std::exchange(handler_body, 0);
      auto e = seq_expr();
      handler_body = saved;
      if (eat(Tok::Colon)) {
        auto t = type_expr();
        expect(Tok::RParen, "')'");
        return mk(EAscribe{std::move(e), std::move(t)}, sp);
      }
      expect(Tok::RParen, "')'");
      return e;
    }
    if (at(Tok::LBrace)) {
      // record literal; handler literals appear only after `with` or in defs
      advance();
      std::vector<std::pair<std::string, ExprPtr>> fields;
      if (!eat(Tok::RBrace)) {
        int saved = std::exchange(handler_body, 0);
        do {
          auto l = expect_ident("record label");
          expect(Tok::Eq, "'='");
          fields.emplace_back(l, seq_expr());
        } while (eat(Tok::Comma));
        handler_body = saved;
        expect(Tok::RBrace, "'}'");
      }
      return mk(ERecord{std::move(fields)}, sp);
    }
    throw ParseError("expected expression", sp);
  }

  ExprPtr postfix() {
    auto e = atom();
    while (at(Tok::Dot)) {
      Span sp = peek().span;
      advance();
      auto l = expect_ident("record label");
      e = mk(EProj{std::move(e), l}, sp);
    }
    return e;
  }

  ExprPtr app_from(ExprPtr head, Span sp) {
    while (atom_start()) head = mk(EApp{std::move(head), postfix()}, sp);
    return head;
  }

  ExprPtr app_expr() {
    Span sp = peek().span;
    return app_from(postfix(), sp);
  }

  ExprPtr stmt_expr() {
    Span sp = peek().span;
    if (eat_kw("let")) {
      auto x = expect_ident("binder name");
      expect(Tok::Eq, "'='");
      auto bound = seq_expr();
      expect_kw("in");
      auto body = seq_expr();
      return mk(ELet{x, std::move(bound), std::move(body)}, sp);
    }
    if (eat_kw("if")) {
      auto c = seq_expr();
      expect_kw("then");
      auto t = seq_expr();
      expect_kw("else");
      auto e = seq_expr();
      return mk(EIf{std::move(c), std::move(t), std::move(e)}, sp);
    }
    if (eat_kw("with")) {
      HandlerExprPtr h;
      std::string href;
      if (at(Tok::LBrace)) {
        h = handler_literal();
      } else {
        href = expect_ident("handler name");
      }
      expect_kw("handle");
      auto body = seq_expr();
      return mk(EHandle{std::move(h), std::move(href), std::move(body)}, sp);
    }
    if (eat_kw("mrec")) {
      EMRec m;
      do {
        MRecBinding b;
        b.binder = binder();
        expect(Tok::Eq, "'='");
        b.value = seq_expr();
        m.bindings.push_back(std::move(b));
      } while (eat_kw("and"));
      expect_kw("in");
      m.body = seq_expr();
      return mk(std::move(m), sp);
    }
    if (eat_kw("return")) return mk(EReturn{app_expr()}, sp);
    if (eat_kw("do")) {
      auto op = expect_ident("operation name");
      ExprPtr e = mk(EOp{op, postfix()}, sp);
      return app_from(std::move(e), sp);
    }
    if (eat_kw("fun")) {
      auto b = binder();
      expect(Tok::Arrow, "'->'");
      auto body = seq_expr();
      return mk(EFun{std::move(b), std::move(body)}, sp);
    }
    if (eat_kw("rec")) {
      auto b = binder();
      expect(Tok::Dot, "'.'");
      auto body = seq_expr();
      return mk(ERec{std::move(b), std::move(body)}, sp);
    }
    return app_expr();
  }

  ExprPtr seq_expr() {
    Span sp = peek().span;
    auto e = stmt_expr();
    if (at(Tok::Semi)) {
      if (handler_body > 0 && clause_follows(pos + 1)) return e;
      advance();
      return mk(ESeq{std::move(e), seq_expr()}, sp);
    }
    return e;
  }

  // ---- module ------------------------------------------------------------

  Module module() {
    Module m;
    while (true) {
      if (at_kw("effect")) {
        Span sp = peek().span;
        advance();
        EffectDecl d;
        d.span = sp;
        d.op = expect_ident("operation name");
        expect(Tok::Colon, "':'");
        d.type = type_expr();
        m.effects.push_back(std::move(d));
        continue;
      }
      if (at_kw("def")) {
        Span sp = peek().span;
        advance();
        Def d;
        d.span = sp;
        d.name = expect_ident("definition name");
        expect(Tok::Eq, "'='");
        if (at(Tok::LBrace) && peek(1).kind == Tok::Keyword && peek(1).text == "return") {
          d.handler = handler_literal();
        } else {
          d.expr = seq_expr();
        }
        m.defs.push_back(std::move(d));
        continue;
      }
      break;
    }
    if (eat_kw("main")) expect(Tok::Eq, "'='");
    m.main = seq_expr();
    expect(Tok::Eof, "end of file");
    return m;
  }
};

}  // namespace

surface::Module parse_module(const std::string& text) {
  Parser p{Lexer(text).run()};
  return p.module();
}

surface::ExprPtr parse_expr_text(const std::string& text) {
  Parser p{Lexer(text).run()};
  auto e = p.seq_expr();
  p.expect(Tok::Eof, "end of file");
  return e;
}

surface::TypeExprPtr parse_type_text(const std::string& text) {
  Parser p{Lexer(text).run()};
  auto t = p.type_expr();
  p.expect(Tok::Eof, "end of file");
  return t;
}

}  // namespace feh
