#include <cctype>
#include <optional>
#include <vector>

#include "cohtt/surface.hpp"

namespace cohtt {

namespace {

// --- lexer -------------------------------------------------------------------

enum class Tok {
  Ident,
  KwDef, KwPostulate, KwRewrite, KwLet, KwIn, KwAt, KwCon,
  KwSet, KwSetw, KwLevel, KwLzero, KwLsuc,
  KwUnit, KwTt, KwEmpty, KwAbsurd,
  KwBool, KwTrue, KwFalse, KwBoolElim,
  KwFlat, KwId, KwRefl, KwJ, KwFst, KwSnd,
  LParen, RParen, LBrace, RBrace,
  Colon, ColonEq, Dot, Comma, Arrow, Star, Eq, Lambda, MaxOp, AtFlat,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  SrcLoc loc;
};

const char* tokName(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::KwDef: return "'def'";
    case Tok::KwPostulate: return "'postulate'";
    case Tok::KwRewrite: return "'rewrite'";
    case Tok::KwLet: return "'let'";
    case Tok::KwIn: return "'in'";
    case Tok::KwAt: return "'at'";
    case Tok::KwCon: return "'con'";
    case Tok::KwSet: return "'Set'";
    case Tok::KwSetw: return "'Setw'";
    case Tok::KwLevel: return "'Level'";
    case Tok::KwLzero: return "'lzero'";
    case Tok::KwLsuc: return "'lsuc'";
    case Tok::KwUnit: return "'Unit'";
    case Tok::KwTt: return "'tt'";
    case Tok::KwEmpty: return "'Empty'";
    case Tok::KwAbsurd: return "'absurd'";
    case Tok::KwBool: return "'Bool'";
    case Tok::KwTrue: return "'true'";
    case Tok::KwFalse: return "'false'";
    case Tok::KwBoolElim: return "'boolElim'";
    case Tok::KwFlat: return "'Flat'";
    case Tok::KwId: return "'Id'";
    case Tok::KwRefl: return "'refl'";
    case Tok::KwJ: return "'J'";
    case Tok::KwFst: return "'fst'";
    case Tok::KwSnd: return "'snd'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Colon: return "':'";
    case Tok::ColonEq: return "':='";
    case Tok::Dot: return "'.'";
    case Tok::Comma: return "','";
    case Tok::Arrow: return "'->'";
    case Tok::Star: return "'*'";
    case Tok::Eq: return "'='";
    case Tok::Lambda: return "'\\'";
    case Tok::MaxOp: return "'\\/'";
    case Tok::AtFlat: return "'@flat'";
    case Tok::End: return "end of input";
  }
  return "?";
}

Tok keywordOf(const std::string& s) {
  if (s == "def") return Tok::KwDef;
  if (s == "postulate") return Tok::KwPostulate;
  if (s == "rewrite") return Tok::KwRewrite;
  if (s == "let") return Tok::KwLet;
  if (s == "in") return Tok::KwIn;
  if (s == "at") return Tok::KwAt;
  if (s == "con") return Tok::KwCon;
  if (s == "Set") return Tok::KwSet;
  if (s == "Setw") return Tok::KwSetw;
  if (s == "Level") return Tok::KwLevel;
  if (s == "lzero") return Tok::KwLzero;
  if (s == "lsuc") return Tok::KwLsuc;
  if (s == "Unit") return Tok::KwUnit;
  if (s == "tt") return Tok::KwTt;
  if (s == "Empty") return Tok::KwEmpty;
  if (s == "absurd") return Tok::KwAbsurd;
  if (s == "Bool") return Tok::KwBool;
  if (s == "true") return Tok::KwTrue;
  if (s == "false") return Tok::KwFalse;
  if (s == "boolElim") return Tok::KwBoolElim;
  if (s == "Flat") return Tok::KwFlat;
  if (s == "Id") return Tok::KwId;
  if (s == "refl") return Tok::KwRefl;
  if (s == "J") return Tok::KwJ;
  if (s == "fst") return Tok::KwFst;
  if (s == "snd") return Tok::KwSnd;
  return Tok::Ident;
}

struct Lexer {
  const std::string& src;
  const std::string& file;
  size_t pos = 0;
  int line = 1, col = 1;

  Lexer(const std::string& s, const std::string& f) : src(s), file(f) {}

  SrcLoc here() const { return {file, line, col}; }
  bool eof() const { return pos >= src.size(); }
  char peekc(size_t off = 0) const { return pos + off < src.size() ? src[pos + off] : '\0'; }

  void advance() {
    if (src[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  void skipBlockComment(SrcLoc open) {
    int depth = 1;
    advance();  // '{'
    advance();  // '-'
    while (depth > 0) {
      if (eof()) fail(E_LEX_COMMENT, open, "unterminated block comment");
      if (peekc() == '{' && peekc(1) == '-') {
        advance(); advance();
        ++depth;
      } else if (peekc() == '-' && peekc(1) == '}') {
        advance(); advance();
        --depth;
      } else {
        advance();
      }
    }
  }

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      while (!eof()) {
        char c = peekc();
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
          advance();
        } else if (c == '-' && peekc(1) == '-') {
          while (!eof() && peekc() != '\n') advance();
        } else if (c == '{' && peekc(1) == '-') {
          skipBlockComment(here());
        } else {
          break;
        }
      }
      if (eof()) {
        out.push_back({Tok::End, "", here()});
        return out;
      }
      SrcLoc loc = here();
      char c = peekc();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string s;
        while (!eof()) {
          char d = peekc();
          if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '\'') {
            s += d;
            advance();
          } else {
            break;
          }
        }
        out.push_back({keywordOf(s), s, loc});
        continue;
      }
      switch (c) {
        case '(': advance(); out.push_back({Tok::LParen, "(", loc}); continue;
        case ')': advance(); out.push_back({Tok::RParen, ")", loc}); continue;
        case '{': advance(); out.push_back({Tok::LBrace, "{", loc}); continue;
        case '}': advance(); out.push_back({Tok::RBrace, "}", loc}); continue;
        case '.': advance(); out.push_back({Tok::Dot, ".", loc}); continue;
        case ',': advance(); out.push_back({Tok::Comma, ",", loc}); continue;
        case '*': advance(); out.push_back({Tok::Star, "*", loc}); continue;
        case '=': advance(); out.push_back({Tok::Eq, "=", loc}); continue;
        case ':':
          advance();
          if (peekc() == '=') {
            advance();
            out.push_back({Tok::ColonEq, ":=", loc});
          } else {
            out.push_back({Tok::Colon, ":", loc});
          }
          continue;
        case '-':
          advance();
          if (peekc() == '>') {
            advance();
            out.push_back({Tok::Arrow, "->", loc});
            continue;
          }
          fail(E_LEX_CHAR, loc, "illegal character '-'");
        case '\\':
          advance();
          if (peekc() == '/') {
            advance();
            out.push_back({Tok::MaxOp, "\\/", loc});
          } else {
            out.push_back({Tok::Lambda, "\\", loc});
          }
          continue;
        case '@': {
          advance();
          std::string s;
          while (!eof() && std::isalpha(static_cast<unsigned char>(peekc()))) {
            s += peekc();
            advance();
          }
          if (s != "flat") fail(E_PARSE, loc, "unknown modifier '@" + s + "'");
          out.push_back({Tok::AtFlat, "@flat", loc});
          continue;
        }
        default: {
          char buf[8];
          unsigned char u = static_cast<unsigned char>(c);
          if (std::isprint(u))
            std::snprintf(buf, sizeof buf, "'%c'", c);
          else
            std::snprintf(buf, sizeof buf, "0x%02X", u);
          fail(E_LEX_CHAR, loc, std::string("illegal character ") + buf);
        }
      }
    }
  }
};

// --- parser ------------------------------------------------------------------

struct BinderGroup {
  std::vector<std::string> names;
  std::vector<SrcLoc> locs;
  bool implicit_ = false;
  bool crisp = false;
  SPtr type;
};

struct Parser {
  std::vector<Token> ts;
  size_t pos = 0;

  const Token& cur() const { return ts[pos]; }
  bool at(Tok k) const { return cur().kind == k; }
  Token next() { return ts[pos++]; }
  bool accept(Tok k) {
    if (at(k)) {
      ++pos;
      return true;
    }
    return false;
  }
  Token expect(Tok k, const char* where) {
    if (!at(k))
      fail(E_PARSE, cur().loc,
           std::string("expected ") + tokName(k) + " " + where + ", found " + tokName(cur().kind));
    return next();
  }

  // Atoms can begin a function argument.
  bool atomStart() const {
    switch (cur().kind) {
      case Tok::Ident: case Tok::LParen:
      case Tok::KwLzero: case Tok::KwTt: case Tok::KwTrue: case Tok::KwFalse:
      case Tok::KwRefl: case Tok::KwUnit: case Tok::KwEmpty: case Tok::KwBool:
      case Tok::KwLevel: case Tok::KwSetw:
        return true;
      default:
        return false;
    }
  }

  SPtr parseAtom() {
    Token t = next();
    switch (t.kind) {
      case Tok::Ident: {
        auto n = smk(St::Name, t.loc);
        n->name = t.text;
        return n;
      }
      case Tok::KwLzero: return smk(St::LZero, t.loc);
      case Tok::KwTt: return smk(St::TT, t.loc);
      case Tok::KwTrue: return smk(St::TrueL, t.loc);
      case Tok::KwFalse: return smk(St::FalseL, t.loc);
      case Tok::KwRefl: return smk(St::Refl, t.loc);
      case Tok::KwUnit: return smk(St::Unit, t.loc);
      case Tok::KwEmpty: return smk(St::Empty, t.loc);
      case Tok::KwBool: return smk(St::Bool, t.loc);
      case Tok::KwLevel: return smk(St::LevelT, t.loc);
      case Tok::KwSetw: return smk(St::UnivTop, t.loc);
      case Tok::LParen: {
        SPtr inner = parseTerm();
        if (accept(Tok::Comma)) {
          SPtr second = parseTerm();
          expect(Tok::RParen, "after pair");
          auto p = smk(St::Pair, t.loc);
          p->a = inner;
          p->b = second;
          return p;
        }
        expect(Tok::RParen, "after parenthesized term");
        return inner;
      }
      default:
        fail(E_PARSE, t.loc, std::string("expected a term, found ") + tokName(t.kind));
    }
  }

  // Built-in operators that take a fixed number of atoms.
  SPtr parsePrimOrAtom() {
    Token t = cur();
    switch (t.kind) {
      case Tok::KwSet: {
        next();
        auto n = smk(St::Univ, t.loc);
        n->a = parseAtom();
        return n;
      }
      case Tok::KwLsuc: {
        next();
        auto n = smk(St::LSuc, t.loc);
        n->a = parseAtom();
        return n;
      }
      case Tok::KwFst: {
        next();
        auto n = smk(St::Fst, t.loc);
        n->a = parseAtom();
        return n;
      }
      case Tok::KwSnd: {
        next();
        auto n = smk(St::Snd, t.loc);
        n->a = parseAtom();
        return n;
      }
      case Tok::KwCon: {
        next();
        auto n = smk(St::Con, t.loc);
        n->a = parseAtom();
        return n;
      }
      case Tok::KwFlat: {
        next();
        auto n = smk(St::Flat, t.loc);
        n->a = parseAtom();
        return n;
      }
      case Tok::KwAbsurd: {
        next();
        auto n = smk(St::Absurd, t.loc);
        n->a = parseAtom();
        n->b = parseAtom();
        return n;
      }
      case Tok::KwId: {
        next();
        auto n = smk(St::Id, t.loc);
        n->a = parseAtom();
        n->b = parseAtom();
        n->c = parseAtom();
        return n;
      }
      case Tok::KwJ: {
        next();
        auto n = smk(St::J, t.loc);
        n->a = parseAtom();  // motive
        n->b = parseAtom();  // proof
        n->c = parseAtom();  // base
        return n;
      }
      case Tok::KwBoolElim: {
        next();
        auto n = smk(St::BoolElim, t.loc);
        n->a = parseAtom();
        n->b = parseAtom();
        n->c = parseAtom();
        n->d = parseAtom();
        return n;
      }
      default:
        return parseAtom();
    }
  }

  SPtr parseApp() {
    SPtr head = parsePrimOrAtom();
    for (;;) {
      if (atomStart() || at(Tok::KwSet) || at(Tok::KwLsuc) || at(Tok::KwFst) || at(Tok::KwSnd) ||
          at(Tok::KwCon) || at(Tok::KwFlat) || at(Tok::KwAbsurd) || at(Tok::KwId) || at(Tok::KwJ) ||
          at(Tok::KwBoolElim)) {
        // Built-in operator forms in argument position must be parenthesized;
        // seeing one here is an application of the head to that whole form.
        SrcLoc loc = cur().loc;
        SPtr arg = parsePrimOrAtom();
        auto app = smk(St::App, loc);
        app->a = head;
        app->b = arg;
        head = app;
      } else if (at(Tok::LBrace)) {
        SrcLoc loc = cur().loc;
        next();
        std::string argName;
        if (at(Tok::Ident) && ts[pos + 1].kind == Tok::ColonEq) {
          argName = next().text;
          next();  // :=
        }
        SPtr arg = parseTerm();
        expect(Tok::RBrace, "after implicit argument");
        auto app = smk(St::App, loc);
        app->a = head;
        app->b = arg;
        app->implicit_ = true;
        app->name = argName;
        head = app;
      } else {
        return head;
      }
    }
  }

  SPtr parseMax() {
    SPtr l = parseApp();
    while (at(Tok::MaxOp)) {
      SrcLoc loc = next().loc;
      SPtr r = parseApp();
      auto n = smk(St::LMax, loc);
      n->a = l;
      n->b = r;
      l = n;
    }
    return l;
  }

  SPtr parseEqLevel() {
    SPtr l = parseMax();
    if (at(Tok::Eq)) {
      SrcLoc loc = next().loc;
      SPtr r = parseMax();
      auto n = smk(St::Eq, loc);
      n->a = l;
      n->b = r;
      if (accept(Tok::Colon)) n->c = parseMax();
      return n;
    }
    return l;
  }

  // Attempts `(x y : A)` / `{@flat x : A}` groups; restores on failure.
  std::vector<BinderGroup> tryBinderGroups() {
    std::vector<BinderGroup> groups;
    for (;;) {
      if (!at(Tok::LParen) && !at(Tok::LBrace)) break;
      size_t mark = pos;
      BinderGroup g;
      g.implicit_ = at(Tok::LBrace);
      next();
      g.crisp = accept(Tok::AtFlat);
      while (at(Tok::Ident)) {
        g.names.push_back(cur().text);
        g.locs.push_back(cur().loc);
        next();
      }
      if (g.names.empty() || !at(Tok::Colon)) {
        pos = mark;
        break;
      }
      next();  // ':'
      g.type = parseTerm();
      expect(g.implicit_ ? Tok::RBrace : Tok::RParen, "after binder");
      groups.push_back(std::move(g));
    }
    return groups;
  }

  static SPtr foldPis(const std::vector<BinderGroup>& groups, SPtr cod) {
    for (size_t gi = groups.size(); gi-- > 0;) {
      const BinderGroup& g = groups[gi];
      for (size_t ni = g.names.size(); ni-- > 0;) {
        auto n = smk(St::Pi, g.locs[ni]);
        n->name = g.names[ni];
        n->implicit_ = g.implicit_;
        n->crisp = g.crisp;
        n->a = g.type;
        n->b = cod;
        cod = n;
      }
    }
    return cod;
  }

  SPtr parseSigmaLike() {
    if (at(Tok::LParen) || at(Tok::LBrace)) {
      std::vector<BinderGroup> groups = tryBinderGroups();
      if (!groups.empty()) {
        if (accept(Tok::Arrow)) return foldPis(groups, parseTerm());
        if (at(Tok::Star)) {
          SrcLoc starLoc = next().loc;
          if (groups.size() != 1 || groups[0].names.size() != 1 || groups[0].implicit_ ||
              groups[0].crisp)
            fail(E_PARSE, starLoc, "a sigma binder must be a single plain (x : A) group");
          SPtr second = parseSigmaLike();
          auto n = smk(St::Sigma, starLoc);
          n->name = groups[0].names[0];
          n->a = groups[0].type;
          n->b = second;
          return n;
        }
        fail(E_PARSE, cur().loc,
             std::string("expected '->' or '*' after binders, found ") + tokName(cur().kind));
      }
    }
    SPtr l = parseEqLevel();
    if (at(Tok::Star)) {
      SrcLoc loc = next().loc;
      SPtr r = parseSigmaLike();
      auto n = smk(St::Sigma, loc);
      n->a = l;
      n->b = r;
      return n;
    }
    return l;
  }

  SPtr parseArrowLevel() {
    SPtr l = parseSigmaLike();
    if (at(Tok::Arrow)) {
      SrcLoc loc = next().loc;
      SPtr r = parseTerm();
      auto n = smk(St::Pi, loc);
      n->name = "_";
      n->a = l;
      n->b = r;
      return n;
    }
    return l;
  }

  SPtr parseTerm() {
    if (at(Tok::Lambda)) {
      SrcLoc loc = next().loc;
      struct LB { std::string name; bool implicit_; SrcLoc loc; };
      std::vector<LB> bs;
      for (;;) {
        if (at(Tok::Ident)) {
          bs.push_back({cur().text, false, cur().loc});
          next();
        } else if (at(Tok::LBrace)) {
          next();
          Token id = expect(Tok::Ident, "in implicit lambda binder");
          expect(Tok::RBrace, "after implicit lambda binder");
          bs.push_back({id.text, true, id.loc});
        } else {
          break;
        }
      }
      if (bs.empty()) fail(E_PARSE, loc, "lambda needs at least one binder");
      expect(Tok::Dot, "after lambda binders");
      SPtr body = parseTerm();
      for (size_t i = bs.size(); i-- > 0;) {
        auto n = smk(St::Lam, bs[i].loc);
        n->name = bs[i].name;
        n->implicit_ = bs[i].implicit_;
        n->a = body;
        body = n;
      }
      return body;
    }
    if (at(Tok::KwLet)) {
      SrcLoc loc = next().loc;
      expect(Tok::KwCon, "after 'let'");
      Token y = expect(Tok::Ident, "in 'let con'");
      expect(Tok::Eq, "in 'let con'");
      SPtr scrut = parseTerm();
      auto n = smk(St::LetCon, loc);
      n->name = y.text;
      n->a = scrut;
      if (accept(Tok::KwAt)) {
        Token x = expect(Tok::Ident, "after 'at'");
        expect(Tok::Dot, "after 'at' binder");
        n->name2 = x.text;
        n->b = parseTerm();
      }
      expect(Tok::KwIn, "in 'let con'");
      n->c = parseTerm();
      return n;
    }
    return parseArrowLevel();
  }

  std::vector<SDecl> parseDecls() {
    std::vector<SDecl> out;
    while (!at(Tok::End)) {
      Token t = next();
      switch (t.kind) {
        case Tok::KwDef: {
          SDecl d;
          d.k = SDecl::Def;
          d.loc = t.loc;
          d.name = expect(Tok::Ident, "after 'def'").text;
          appendBinders(d);
          expect(Tok::Colon, "before the declared type");
          d.type = parseTerm();
          expect(Tok::ColonEq, "before the definition body");
          d.body = parseTerm();
          out.push_back(std::move(d));
          break;
        }
        case Tok::KwPostulate: {
          SDecl d;
          d.k = SDecl::Postulate;
          d.loc = t.loc;
          d.name = expect(Tok::Ident, "after 'postulate'").text;
          appendBinders(d);
          expect(Tok::Colon, "before the postulated type");
          d.type = parseTerm();
          out.push_back(std::move(d));
          break;
        }
        case Tok::KwRewrite: {
          SDecl d;
          d.k = SDecl::Rewrite;
          d.loc = t.loc;
          d.ruleNames.push_back(expect(Tok::Ident, "after 'rewrite'").text);
          while (at(Tok::Ident)) d.ruleNames.push_back(next().text);
          out.push_back(std::move(d));
          break;
        }
        default:
          fail(E_PARSE, t.loc,
               std::string("expected a declaration, found ") + tokName(t.kind));
      }
    }
    return out;
  }

  void appendBinders(SDecl& d) {
    std::vector<BinderGroup> groups = tryBinderGroups();
    for (const BinderGroup& g : groups) {
      for (size_t i = 0; i < g.names.size(); ++i) {
        SBinder b;
        b.name = g.names[i];
        b.implicit_ = g.implicit_;
        b.crisp = g.crisp;
        b.type = g.type;
        b.loc = g.locs[i];
        d.binders.push_back(std::move(b));
      }
    }
  }
};

}  // namespace

std::vector<SDecl> parseFile(const std::string& src, const std::string& fileName) {
  Lexer lx(src, fileName);
  Parser p{lx.run()};
  return p.parseDecls();
}

SPtr parseTerm(const std::string& src, const std::string& fileName) {
  Lexer lx(src, fileName);
  Parser p{lx.run()};
  SPtr t = p.parseTerm();
  if (!p.at(Tok::End))
    fail(E_PARSE, p.cur().loc,
         std::string("unexpected ") + tokName(p.cur().kind) + " after term");
  return t;
}

}  // namespace cohtt
