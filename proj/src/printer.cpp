#include "cohtt/printer.hpp"

#include <algorithm>

#include "json.hpp"

namespace cohtt {

namespace {

// Precedence levels: 0 term (arrows, lambdas, let), 1 sigma, 2 level-max,
// 3 application, 4 atom.
constexpr int PTerm = 0, PSigma = 1, PMax = 2, PApp = 3, PAtom = 4;

struct Printer {
  std::vector<std::string> names;

  std::string varName(int idx) {
    if (idx >= 0 && idx < static_cast<int>(names.size()))
      return names[names.size() - 1 - idx];
    return "#" + std::to_string(idx);  // out of scope: internal/error output only
  }

  std::string freshen(const std::string& hint, bool used) {
    std::string base = hint.empty() ? "_" : hint;
    if (base == "_") {
      if (!used) return "_";
      base = "x";
    }
    std::string cand = base;
    while (std::find(names.begin(), names.end(), cand) != names.end()) cand += "'";
    return cand;
  }

  static std::string paren(bool need, std::string s) {
    return need ? "(" + std::move(s) + ")" : std::move(s);
  }

  std::string go(const TermPtr& t, int prec) {
    switch (t->tag) {
      case Tm::Var:
        return varName(t->idx);
      case Tm::Const:
        return t->name;
      case Tm::Meta:
        return "?" + std::to_string(t->idx);
      case Tm::Univ:
        if (t->top) return "Setw";
        return paren(prec > PApp, "Set " + go(t->a, PAtom));
      case Tm::LevelT:
        return "Level";
      case Tm::LZero:
        return "lzero";
      case Tm::LSuc:
        return paren(prec > PApp, "lsuc " + go(t->a, PAtom));
      case Tm::LMax:
        return paren(prec > PMax, go(t->a, PMax) + " \\/ " + go(t->b, PApp));
      case Tm::Pi: {
        bool dep = usesVar(t->b, 0);
        std::string out;
        if (!dep && !t->implicit_ && !t->crisp) {
          out = go(t->a, PSigma) + " -> ";
          names.push_back("_");
        } else {
          std::string n = freshen(t->name, dep);
          std::string open = t->implicit_ ? "{" : "(";
          std::string close = t->implicit_ ? "}" : ")";
          out = open + (t->crisp ? "@flat " : "") + n + " : " + go(t->a, PTerm) + close + " -> ";
          names.push_back(n);
        }
        out += go(t->b, PTerm);
        names.pop_back();
        return paren(prec > PTerm, std::move(out));
      }
      case Tm::Lam: {
        std::string n = freshen(t->name, usesVar(t->a, 0));
        std::string head = t->implicit_ ? "\\{" + n + "}. " : "\\" + n + ". ";
        names.push_back(n);
        std::string body = go(t->a, PTerm);
        names.pop_back();
        return paren(prec > PTerm, head + body);
      }
      case Tm::App: {
        std::string f = go(t->a, PApp);
        std::string x = t->implicit_ ? "{" + go(t->b, PTerm) + "}" : go(t->b, PAtom);
        return paren(prec > PApp, f + " " + x);
      }
      case Tm::Sigma: {
        bool dep = usesVar(t->b, 0);
        std::string out;
        if (dep) {
          std::string n = freshen(t->name, true);
          out = "(" + n + " : " + go(t->a, PTerm) + ") * ";
          names.push_back(n);
        } else {
          out = go(t->a, PMax) + " * ";
          names.push_back("_");
        }
        out += go(t->b, PSigma);
        names.pop_back();
        return paren(prec > PSigma, std::move(out));
      }
      case Tm::Pair:
        return "(" + go(t->a, PTerm) + " , " + go(t->b, PTerm) + ")";
      case Tm::Fst:
        return paren(prec > PApp, "fst " + go(t->a, PAtom));
      case Tm::Snd:
        return paren(prec > PApp, "snd " + go(t->a, PAtom));
      case Tm::Id:
        return paren(prec > PApp,
                     "Id " + go(t->a, PAtom) + " " + go(t->b, PAtom) + " " + go(t->c, PAtom));
      case Tm::Refl:
        return "refl";
      case Tm::J:
        return paren(prec > PApp,
                     "J " + go(t->a, PAtom) + " " + go(t->c, PAtom) + " " + go(t->b, PAtom));
      case Tm::Unit:
        return "Unit";
      case Tm::TT:
        return "tt";
      case Tm::Empty:
        return "Empty";
      case Tm::Absurd:
        return paren(prec > PApp, "absurd " + go(t->a, PAtom) + " " + go(t->b, PAtom));
      case Tm::Bool:
        return "Bool";
      case Tm::TrueC:
        return "true";
      case Tm::FalseC:
        return "false";
      case Tm::BoolElim:
        return paren(prec > PApp, "boolElim " + go(t->a, PAtom) + " " + go(t->b, PAtom) + " " +
                                      go(t->c, PAtom) + " " + go(t->d, PAtom));
      case Tm::Flat:
        return paren(prec > PApp, "Flat " + go(t->b, PAtom));
      case Tm::Con:
        return paren(prec > PApp, "con " + go(t->a, PAtom));
      case Tm::FlatElim: {
        std::string out = "let con ";
        std::string y = freshen(t->name.empty() ? "y" : t->name, true);
        out += y + " = " + go(t->b, PTerm) + " at ";
        // Motives are stored applied; print the lambda body when we have one.
        TermPtr motive = t->a;
        std::string x;
        TermPtr motiveBody;
        if (motive->tag == Tm::Lam) {
          x = freshen(motive->name.empty() ? t->name2 : motive->name, usesVar(motive->a, 0));
          motiveBody = motive->a;
        } else {
          x = freshen(t->name2.empty() ? "w" : t->name2, true);
          motiveBody = mkApp(shiftTerm(motive, 1), mkVar(0));
        }
        names.push_back(x);
        out += x + ". " + go(motiveBody, PTerm);
        names.pop_back();
        out += " in ";
        names.push_back(y);
        out += go(t->c, PTerm);
        names.pop_back();
        return paren(prec > PTerm, std::move(out));
      }
    }
    return "?";
  }

  nlohmann::json json(const TermPtr& t) {
    using nlohmann::json;
    json j;
    switch (t->tag) {
      case Tm::Var: j["tag"] = "var"; j["index"] = t->idx; j["name"] = varName(t->idx); break;
      case Tm::Const: j["tag"] = "const"; j["name"] = t->name; break;
      case Tm::Meta: j["tag"] = "meta"; j["id"] = t->idx; break;
      case Tm::Univ:
        j["tag"] = "universe";
        if (t->top) j["top"] = true; else j["level"] = json(this->json(t->a));
        break;
      case Tm::LevelT: j["tag"] = "level-type"; break;
      case Tm::LZero: j["tag"] = "lzero"; break;
      case Tm::LSuc: j["tag"] = "lsuc"; j["arg"] = json(this->json(t->a)); break;
      case Tm::LMax:
        j["tag"] = "lmax"; j["left"] = json(this->json(t->a)); j["right"] = json(this->json(t->b));
        break;
      case Tm::Pi: case Tm::Sigma: {
        j["tag"] = t->tag == Tm::Pi ? "pi" : "sigma";
        std::string n = freshen(t->name, usesVar(t->b, 0));
        j["binder"] = n;
        if (t->tag == Tm::Pi) { j["implicit"] = t->implicit_; j["crisp"] = t->crisp; }
        j["domain"] = json(this->json(t->a));
        names.push_back(n);
        j["codomain"] = json(this->json(t->b));
        names.pop_back();
        break;
      }
      case Tm::Lam: {
        j["tag"] = "lambda";
        std::string n = freshen(t->name, usesVar(t->a, 0));
        j["binder"] = n;
        j["implicit"] = t->implicit_;
        names.push_back(n);
        j["body"] = json(this->json(t->a));
        names.pop_back();
        break;
      }
      case Tm::App:
        j["tag"] = "app"; j["implicit"] = t->implicit_;
        j["fun"] = json(this->json(t->a)); j["arg"] = json(this->json(t->b));
        break;
      case Tm::Pair:
        j["tag"] = "pair"; j["fst"] = json(this->json(t->a)); j["snd"] = json(this->json(t->b));
        break;
      case Tm::Fst: j["tag"] = "fst"; j["arg"] = json(this->json(t->a)); break;
      case Tm::Snd: j["tag"] = "snd"; j["arg"] = json(this->json(t->a)); break;
      case Tm::Id:
        j["tag"] = "id";
        j["type"] = json(this->json(t->a));
        j["left"] = json(this->json(t->b));
        j["right"] = json(this->json(t->c));
        break;
      case Tm::Refl: j["tag"] = "refl"; break;
      case Tm::J:
        j["tag"] = "j";
        j["motive"] = json(this->json(t->a));
        j["base"] = json(this->json(t->b));
        j["proof"] = json(this->json(t->c));
        break;
      case Tm::Unit: j["tag"] = "unit"; break;
      case Tm::TT: j["tag"] = "tt"; break;
      case Tm::Empty: j["tag"] = "empty"; break;
      case Tm::Absurd:
        j["tag"] = "absurd";
        j["type"] = json(this->json(t->a));
        j["arg"] = json(this->json(t->b));
        break;
      case Tm::Bool: j["tag"] = "bool"; break;
      case Tm::TrueC: j["tag"] = "true"; break;
      case Tm::FalseC: j["tag"] = "false"; break;
      case Tm::BoolElim:
        j["tag"] = "bool-elim";
        j["motive"] = json(this->json(t->a));
        j["true-case"] = json(this->json(t->b));
        j["false-case"] = json(this->json(t->c));
        j["scrutinee"] = json(this->json(t->d));
        break;
      case Tm::Flat:
        j["tag"] = "flat";
        j["level"] = json(this->json(t->a));
        j["type"] = json(this->json(t->b));
        break;
      case Tm::Con: j["tag"] = "con"; j["arg"] = json(this->json(t->a)); break;
      case Tm::FlatElim: {
        j["tag"] = "flat-elim";
        j["motive"] = json(this->json(t->a));
        j["scrutinee"] = json(this->json(t->b));
        std::string y = freshen(t->name.empty() ? "y" : t->name, true);
        j["binder"] = y;
        names.push_back(y);
        j["branch"] = json(this->json(t->c));
        names.pop_back();
        break;
      }
    }
    return j;
  }
};

}  // namespace

std::string printTerm(const TermPtr& t, std::vector<std::string> names) {
  Printer p{std::move(names)};
  return p.go(t, PTerm);
}

std::string printValue(ECtx& E, const Vp& v, int depth, std::vector<std::string> names) {
  return printTerm(readback(E, depth, v), std::move(names));
}

std::string termJsonString(const TermPtr& t, std::vector<std::string> names, int indent) {
  Printer p{names};
  nlohmann::json j = p.json(t);
  j["pretty"] = printTerm(t, std::move(names));
  return j.dump(indent);
}

}  // namespace cohtt
