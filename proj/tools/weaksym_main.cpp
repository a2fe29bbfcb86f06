#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "weaksym/scenarios.hpp"

using namespace weaksym;

namespace {

std::vector<double> make_eps_grid(int jmin, int jmax) {
  std::vector<double> g;
  for (int j = jmin; j <= jmax; ++j) g.push_back(std::ldexp(1.0, -j));
  return g;
}

int finish(const Report& rep, const std::string& report_path, bool text) {
  std::string body = text ? emit_report_text(rep) : emit_report_json(rep);
  if (report_path.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(report_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot open report file: " << report_path << "\n";
      return 2;
    }
    out << body;
  }
  return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weak-regime Lie symmetry toolkit"};
  app.require_subcommand(1);

  ScenarioOptions opt;
  int jmin = 3, jmax = 12;
  std::string report_path;
  bool text = false;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", opt.seed, "sampling seed")->capture_default_str();
    cmd->add_option("--tol", opt.tol, "residual tolerance")
        ->capture_default_str();
    cmd->add_option("--eps-min-exp", jmin,
                    "largest epsilon is 2^-this")->capture_default_str();
    cmd->add_option("--eps-max-exp", jmax,
                    "smallest epsilon is 2^-this")->capture_default_str();
    cmd->add_option("--report", report_path, "write the report here");
    cmd->add_flag("--text", text, "text table instead of JSON");
  };

  auto* sc = app.add_subcommand("scenario", "run a built-in scenario");
  std::string name;
  std::vector<std::string> overrides;
  sc->add_option("name", name, "one of: " + [] {
        std::string s;
        for (const auto& n : scenario_names()) s += (s.empty() ? "" : ", ") + n;
        return s;
      }())
      ->required();
  sc->add_option("--set", overrides, "parameter override key=value")
      ->expected(-1);
  add_common(sc);

  auto* an = app.add_subcommand("analyze", "run tasks on a model file");
  std::string file;
  std::string tasks_csv;
  an->add_option("file", file, "model description file")->required();
  an->add_option("--tasks", tasks_csv,
                 "comma-separated: factor,determining,verify,associate,"
                 "scenario");
  add_common(an);

  CLI11_PARSE(app, argc, argv);
  opt.eps_grid = make_eps_grid(jmin, jmax);

  try {
    if (sc->parsed()) {
      for (const std::string& ov : overrides) {
        size_t eq = ov.find('=');
        if (eq == std::string::npos) {
          std::cerr << "override must be key=value: " << ov << "\n";
          return 2;
        }
        try {
          opt.overrides[ov.substr(0, eq)] = std::stod(ov.substr(eq + 1));
        } catch (const std::exception&) {
          std::cerr << "override value is not a number: " << ov << "\n";
          return 2;
        }
      }
      return finish(run_scenario(name, opt), report_path, text);
    }

    std::ifstream in(file, std::ios::binary);
    if (!in) {
      std::cerr << "cannot open model file: " << file << "\n";
      return 2;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    ModelFile mf = parse_model_file(buf.str());
    std::vector<std::string> tasks;
    std::stringstream ts(tasks_csv);
    std::string t;
    while (std::getline(ts, t, ','))
      if (!t.empty()) tasks.push_back(t);
    return finish(analyze(mf, tasks, opt), report_path, text);
  } catch (const ModelError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const ScenarioError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
