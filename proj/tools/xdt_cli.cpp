// Command-line front end: validate, run, minimize, compare, and inspect
// streaming term transducers in the line-oriented text format.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xdt/xdt.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParseOrUsage = 1;
constexpr int kExitSemantic = 2;
constexpr int kExitNegative = 3;  // undefined run / not equivalent / check failed

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw xdt::UsageError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> parse_word(const std::string& arg) {
  std::vector<std::string> w;
  if (arg.empty()) return w;
  if (arg.find(',') != std::string::npos) {
    std::string cur;
    for (char c : arg) {
      if (c == ',') {
        w.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    w.push_back(cur);
    return w;
  }
  for (char c : arg) w.push_back(std::string(1, c));
  return w;
}

std::string render_word(const std::vector<std::string>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i && w[i].size() > 1) s += ',';
    s += w[i];
  }
  return s.empty() ? "<empty>" : s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streaming term-transducer toolkit"};
  app.require_subcommand(1);

  std::string file, file2, out_path, word_arg, state_name;
  int maxlen = 8, depth = 0;
  bool exact = false;

  auto* cmd_validate = app.add_subcommand("validate", "check a transducer file");
  cmd_validate->add_option("file", file)->required();

  auto* cmd_run = app.add_subcommand("run", "run a transducer on a word");
  cmd_run->add_option("file", file)->required();
  cmd_run->add_option("word", word_arg)->required();

  auto* cmd_min = app.add_subcommand("minimize", "write the minimal equivalent transducer");
  cmd_min->add_option("file", file)->required();
  cmd_min->add_option("-o,--output", out_path);

  auto* cmd_equiv = app.add_subcommand("equiv", "compare two transducers");
  cmd_equiv->add_option("file1", file)->required();
  cmd_equiv->add_option("file2", file2)->required();
  cmd_equiv->add_option("--maxlen", maxlen);
  cmd_equiv->add_flag("--exact", exact);

  auto* cmd_gcd = app.add_subcommand("gcd", "print a state's departing-family divisor");
  cmd_gcd->add_option("file", file)->required();
  cmd_gcd->add_option("--state", state_name)->required();
  cmd_gcd->add_option("--depth", depth);

  auto* cmd_mgu = app.add_subcommand("mgu", "solve an equation-system file");
  cmd_mgu->add_option("file", file)->required();

  auto* cmd_inv = app.add_subcommand("check-invariance", "recheck divisor right-invariance");
  cmd_inv->add_option("file", file)->required();
  cmd_inv->add_option("--maxlen", maxlen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitParseOrUsage;
  }

  try {
    if (cmd_validate->parsed()) {
      xdt::parse_transducer(read_file(file));
      std::cout << "valid\n";
      return kExitOk;
    }
    if (cmd_run->parsed()) {
      xdt::Transducer A = xdt::parse_transducer(read_file(file));
      auto out = xdt::evaluate(A, parse_word(word_arg));
      if (!out) {
        std::cout << "undefined\n";
        return kExitNegative;
      }
      std::cout << out->render() << "\n";
      return kExitOk;
    }
    if (cmd_min->parsed()) {
      xdt::Transducer A = xdt::parse_transducer(read_file(file));
      std::string text = xdt::render_transducer(xdt::minimize(A));
      if (out_path.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(out_path);
        if (!out) throw xdt::UsageError("cannot write " + out_path);
        out << text;
      }
      return kExitOk;
    }
    if (cmd_equiv->parsed()) {
      xdt::Transducer A = xdt::parse_transducer(read_file(file));
      xdt::Transducer B = xdt::parse_transducer(read_file(file2));
      if (exact) {
        if (A.kind != B.kind)
          throw xdt::TypeError("exact comparison requires the same algebra");
        if (xdt::isomorphic(xdt::minimize(A), xdt::minimize(B))) {
          std::cout << "equivalent\n";
          return kExitOk;
        }
        std::cerr << "minimal forms are not isomorphic\n";
        return kExitNegative;
      }
      xdt::EquivalenceResult r = xdt::equivalence_bounded(A, B, maxlen);
      if (r.equivalent) {
        std::cout << "equivalent up to length " << maxlen << "\n";
        return kExitOk;
      }
      std::cerr << "counterexample: " << render_word(*r.counterexample) << "\n";
      return kExitNegative;
    }
    if (cmd_gcd->parsed()) {
      xdt::Transducer A = xdt::parse_transducer(read_file(file));
      int q = A.state_index(state_name);
      if (q < 0) throw xdt::UsageError("unknown state " + state_name);
      xdt::DivisorAssignment D = xdt::gcd_fixpoint(A);
      if (!D.f[q]) {
        std::cout << "undefined\n";
        return kExitOk;
      }
      std::cout << D.f[q]->render() << "\n";
      if (depth > 0) {
        std::vector<std::vector<std::string>> layer{{}};
        for (int len = 0; len <= depth; ++len) {
          for (auto& t : layer) {
            auto u = xdt::induced_update(A, q, t, true);
            if (!u) continue;
            auto res = xdt::residual_via_epi(*D.f[q], *u);
            std::cout << render_word(t) << ": " << u->render() << "  residual "
                      << (res ? res->render() : std::string("<none>")) << "\n";
          }
          std::vector<std::vector<std::string>> next;
          for (auto& t : layer)
            for (auto& a : A.letters) {
              auto t2 = t;
              t2.push_back(a);
              next.push_back(std::move(t2));
            }
          layer = std::move(next);
        }
      }
      return kExitOk;
    }
    if (cmd_mgu->parsed()) {
      xdt::EquationFile ef = xdt::parse_equation_file(read_file(file));
      std::cout << xdt::mgu(ef.system, ef.alphabet).render() << "\n";
      return kExitOk;
    }
    if (cmd_inv->parsed()) {
      xdt::Transducer A = xdt::parse_transducer(read_file(file));
      xdt::InvarianceReport rep = xdt::right_invariance_check(A, maxlen);
      std::cout << "checked " << rep.checked << " prefixes\n";
      for (auto& issue : rep.issues) std::cerr << issue << "\n";
      return rep.ok ? kExitOk : kExitNegative;
    }
  } catch (const xdt::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParseOrUsage;
  } catch (const xdt::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParseOrUsage;
  } catch (const xdt::TypeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSemantic;
  } catch (const xdt::InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitSemantic;
  }
  return kExitParseOrUsage;
}
