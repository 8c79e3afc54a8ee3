#include "feh/minsky.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

namespace feh {

namespace {

[[noreturn]] void bad(int line_no, const std::string& msg) {
  throw std::runtime_error("machine line " + std::to_string(line_no) + ": " + msg);
}

struct LineParser {
  const std::string& s;
  size_t pos = 0;
  int line_no;

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }

  bool done() {
    skip_ws();
    return pos >= s.size();
  }

  std::string word() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() && !std::isspace((unsigned char)s[pos]) && s[pos] != ':') ++pos;
    return s.substr(start, pos - start);
  }

  void expect_colon() {
    skip_ws();
    if (pos >= s.size() || s[pos] != ':') bad(line_no, "expected ':'");
    ++pos;
  }
};

int parse_state(const std::string& w, int line_no) {
  if (w.size() < 2 || w[0] != 'q') bad(line_no, "expected a state like q0, got '" + w + "'");
  for (size_t i = 1; i < w.size(); ++i) {
    if (!std::isdigit((unsigned char)w[i])) bad(line_no, "bad state name '" + w + "'");
  }
  return std::stoi(w.substr(1));
}

int parse_reg(const std::string& w, int line_no) {
  if (w != "r0" && w != "r1") bad(line_no, "expected r0 or r1, got '" + w + "'");
  return w == "r0" ? 0 : 1;
}

void expect_word(LineParser& lp, const char* want) {
  auto w = lp.word();
  if (w != want) bad(lp.line_no, std::string("expected '") + want + "', got '" + w + "'");
}

}  // namespace

MinskyMachine parse_machine(const std::string& text) {
  std::map<int, MinskyInstr> instrs;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    LineParser lp{line, 0, line_no};
    if (lp.done()) continue;
    int state = parse_state(lp.word(), line_no);
    lp.expect_colon();
    auto kind = lp.word();
    MinskyInstr instr;
    if (kind == "halt") {
      instr.kind = MinskyInstr::Kind::Halt;
    } else if (kind == "inc") {
      instr.kind = MinskyInstr::Kind::Inc;
      instr.reg = parse_reg(lp.word(), line_no);
      expect_word(lp, "goto");
      instr.next = parse_state(lp.word(), line_no);
    } else if (kind == "ifz") {
      instr.kind = MinskyInstr::Kind::DecOrZero;
      instr.reg = parse_reg(lp.word(), line_no);
      expect_word(lp, "goto");
      instr.zero_next = parse_state(lp.word(), line_no);
      expect_word(lp, "else");
      expect_word(lp, "dec");
      expect_word(lp, "goto");
      instr.dec_next = parse_state(lp.word(), line_no);
    } else {
      bad(line_no, "expected one of inc/ifz/halt, got '" + kind + "'");
    }
    if (!lp.done()) bad(line_no, "trailing input");
    if (instrs.count(state)) bad(line_no, "state q" + std::to_string(state) + " redefined");
    instrs[state] = instr;
  }
  if (instrs.empty()) throw std::runtime_error("machine has no states");
  MinskyMachine m;
  m.states.resize(instrs.rbegin()->first + 1);
  for (int j = 0; j < (int)m.states.size(); ++j) {
    auto it = instrs.find(j);
    if (it == instrs.end()) {
      throw std::runtime_error("state q" + std::to_string(j) + " is not defined");
    }
    m.states[j] = it->second;
  }
  auto check_target = [&](int q) {
    if (q < 0 || q >= (int)m.states.size()) {
      throw std::runtime_error("goto target q" + std::to_string(q) + " does not exist");
    }
  };
  for (const auto& i : m.states) {
    if (i.kind == MinskyInstr::Kind::Inc) check_target(i.next);
    if (i.kind == MinskyInstr::Kind::DecOrZero) {
      check_target(i.zero_next);
      check_target(i.dec_next);
    }
  }
  return m;
}

std::string print_machine(const MinskyMachine& m) {
  std::string out;
  for (size_t j = 0; j < m.states.size(); ++j) {
    const auto& i = m.states[j];
    out += "q" + std::to_string(j) + ": ";
    switch (i.kind) {
      case MinskyInstr::Kind::Halt:
        out += "halt";
        break;
      case MinskyInstr::Kind::Inc:
        out += "inc r" + std::to_string(i.reg) + " goto q" + std::to_string(i.next);
        break;
      case MinskyInstr::Kind::DecOrZero:
        out += "ifz r" + std::to_string(i.reg) + " goto q" + std::to_string(i.zero_next) +
               " else dec goto q" + std::to_string(i.dec_next);
        break;
    }
    out += "\n";
  }
  return out;
}

SimResult simulate(const MinskyMachine& m, uint64_t fuel) {
  int q = 0;
  uint64_t reg[2] = {0, 0};
  SimResult r;
  for (uint64_t used = 0; used < fuel; ++used) {
    const auto& i = m.states[q];
    switch (i.kind) {
      case MinskyInstr::Kind::Halt:
        r.halted = true;
        r.steps = used;
        return r;
      case MinskyInstr::Kind::Inc:
        ++reg[i.reg];
        q = i.next;
        break;
      case MinskyInstr::Kind::DecOrZero:
        if (reg[i.reg] == 0) {
          q = i.zero_next;
        } else {
          --reg[i.reg];
          q = i.dec_next;
        }
        break;
    }
    r.steps = used + 1;
  }
  if (m.states[q].kind == MinskyInstr::Kind::Halt) r.halted = true;
  return r;
}

std::string compile_mm(const MinskyMachine& m) {
  std::string out;
  out += "// compiled 2-register Minsky machine (" + std::to_string(m.states.size()) +
         " states)\n";
  out += "effect succ : (Unit -> Unit) -> Unit\n\n";
  out += "main =\n";
  const std::string fn_ty = "(Unit -> Unit) -> (Unit -> Unit) -> Unit";
  for (size_t j = 0; j < m.states.size(); ++j) {
    const auto& i = m.states[j];
    out += j == 0 ? "mrec " : "and ";
    out += "(f" + std::to_string(j) + " : " + fn_ty + ") = ";
    out += "fun (x0 : Unit -> Unit) -> fun (x1 : Unit -> Unit) ->\n  ";
    auto call = [](int state) {
      return "f" + std::to_string(state) + " x0 x1";
    };
    switch (i.kind) {
      case MinskyInstr::Kind::Halt:
        out += "()";
        break;
      case MinskyInstr::Kind::Inc: {
        std::string x = "x" + std::to_string(i.reg);
        out += "let " + x + " = (fun (y : Unit) -> do succ " + x + ") in " + call(i.next);
        break;
      }
      case MinskyInstr::Kind::DecOrZero: {
        std::string x = "x" + std::to_string(i.reg);
        out += "with {return x -> " + call(i.zero_next) + "; succ(" + x + "; k) -> " +
               call(i.dec_next) + "} handle " + x + " ()";
        break;
      }
    }
    out += "\n";
  }
  out += "in (f0 (fun (x : Unit) -> ()) (fun (x : Unit) -> ())); return true\n";
  return out;
}

int succ_wrapper_depth(const ValuePtr& v) {
  const auto* l = v->as<Lam>();
  if (!l) return 0;
  const auto* o = l->body->as<OpCall>();
  if (!o || o->op != "succ") return 0;
  return 1 + succ_wrapper_depth(o->arg);
}

}  // namespace feh
