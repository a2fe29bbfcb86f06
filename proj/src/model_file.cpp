#include "weaksym/model_file.hpp"

#include <sstream>

#include "weaksym/mollifier.hpp"
#include "weaksym/parser.hpp"

namespace weaksym {

namespace {

struct Line {
  int number = 0;
  std::string text;  // comment-stripped
};

std::vector<Line> split_lines(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  int n = 0;
  while (std::getline(in, raw)) {
    ++n;
    size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    out.push_back({n, raw});
  }
  return out;
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

// first token and the remainder (with its column) of a line
void split_keyword(const std::string& s, std::string& kw, std::string& rest,
                   int& rest_col) {
  size_t b = s.find_first_not_of(" \t");
  size_t e = s.find_first_of(" \t", b);
  kw = s.substr(b, e == std::string::npos ? std::string::npos : e - b);
  if (e == std::string::npos) {
    rest.clear();
    rest_col = (int)s.size() + 1;
    return;
  }
  size_t r = s.find_first_not_of(" \t", e);
  if (r == std::string::npos) {
    rest.clear();
    rest_col = (int)s.size() + 1;
    return;
  }
  rest = s.substr(r);
  size_t tail = rest.find_last_not_of(" \t\r");
  rest.erase(tail + 1);
  rest_col = (int)r + 1;
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

double parse_number(const std::string& w, int line, int col) {
  try {
    size_t used = 0;
    double v = std::stod(w, &used);
    if (used != w.size()) throw std::invalid_argument(w);
    return v;
  } catch (const std::exception&) {
    throw ModelError("expected a number, got '" + w + "'", line, col);
  }
}

}  // namespace

ModelFile parse_model_file(const std::string& text) {
  ModelFile m;
  enum Section { None, Vars, System, Group, Generator, Net, Scenario };
  Section sec = None;
  for (const Line& ln : split_lines(text)) {
    if (blank(ln.text)) continue;
    std::string kw, rest;
    int rcol;
    split_keyword(ln.text, kw, rest, rcol);
    int kcol = (int)ln.text.find_first_not_of(" \t") + 1;

    if (!kw.empty() && kw.back() == ':') {
      std::string name = kw.substr(0, kw.size() - 1);
      if (name == "vars")
        sec = Vars;
      else if (name == "system")
        sec = System;
      else if (name == "group")
        sec = Group;
      else if (name == "generator")
        sec = Generator;
      else if (name == "net")
        sec = Net;
      else if (name == "scenario")
        sec = Scenario;
      else
        throw ModelError("unknown section '" + name + "'", ln.number, kcol);
      continue;
    }

    auto pos = [&](const std::string& key) {
      m.positions[key] = {ln.number, rcol};
    };
    switch (sec) {
      case None:
        throw ModelError("content before the first section header", ln.number,
                         kcol);
      case Vars:
        if (kw == "independent")
          for (const auto& w : words(rest)) m.independent.push_back(w);
        else if (kw == "dependent")
          for (const auto& w : words(rest)) m.dependent.push_back(w);
        else if (kw == "order")
          m.order = (int)parse_number(rest, ln.number, rcol);
        else
          throw ModelError("unknown vars entry '" + kw + "'", ln.number, kcol);
        break;
      case System:
        if (kw == "eq") {
          pos("eq:" + std::to_string(m.equations.size()));
          m.equations.push_back(rest);
        } else if (kw == "solve") {
          pos("solve:" + std::to_string(m.solved.size()));
          m.solved.push_back(rest);
        } else {
          throw ModelError("unknown system entry '" + kw + "'", ln.number,
                           kcol);
        }
        break;
      case Group:
        if (kw == "xi") {
          pos("xi:" + std::to_string(m.xi.size()));
          m.xi.push_back(rest);
        } else if (kw == "phi") {
          pos("phi:" + std::to_string(m.phi.size()));
          m.phi.push_back(rest);
        } else if (kw == "linear") {
          m.linear_in_u = true;
        } else {
          throw ModelError("unknown group entry '" + kw + "'", ln.number,
                           kcol);
        }
        break;
      case Generator:
        if (kw == "xi") {
          pos("gen_xi:" + std::to_string(m.gen_xi.size()));
          m.gen_xi.push_back(rest);
        } else if (kw == "phi") {
          pos("gen_phi:" + std::to_string(m.gen_phi.size()));
          m.gen_phi.push_back(rest);
        } else {
          throw ModelError("unknown generator entry '" + kw + "'", ln.number,
                           kcol);
        }
        break;
      case Net:
        if (kw == "component") {
          pos("net:" + std::to_string(m.net_components.size()));
          m.net_components.push_back(rest);
        } else if (kw == "shock") {
          auto w = words(rest);
          if (w.size() != 3)
            throw ModelError("shock takes: left right speed", ln.number, rcol);
          m.shock = ModelFile::Shock{parse_number(w[0], ln.number, rcol),
                                     parse_number(w[1], ln.number, rcol),
                                     parse_number(w[2], ln.number, rcol)};
        } else if (kw == "layer") {
          pos("layer");
          m.net_layer = rest;
        } else if (kw == "domain") {
          auto w = words(rest);
          if (w.size() != 2)
            throw ModelError("domain takes: lo hi", ln.number, rcol);
          m.domain.push_back({parse_number(w[0], ln.number, rcol),
                              parse_number(w[1], ln.number, rcol)});
        } else {
          throw ModelError("unknown net entry '" + kw + "'", ln.number, kcol);
        }
        break;
      case Scenario:
        if (kw == "name") {
          m.scenario_name = rest;
        } else if (kw == "set") {
          auto w = words(rest);
          if (w.size() != 2)
            throw ModelError("set takes: key value", ln.number, rcol);
          m.params[w[0]] = parse_number(w[1], ln.number, rcol);
        } else if (kw == "flux") {
          if (rest != "id" && rest != "exp")
            throw ModelError("flux must be id or exp", ln.number, rcol);
          m.flux = rest;
        } else {
          throw ModelError("unknown scenario entry '" + kw + "'", ln.number,
                           kcol);
        }
        break;
    }
  }
  if (m.independent.empty() && !m.equations.empty())
    throw ModelError("system given without a vars section", 1, 1);
  return m;
}

std::string serialize_model_file(const ModelFile& m) {
  std::ostringstream out;
  out << "vars:\n  independent";
  for (const auto& v : m.independent) out << " " << v;
  out << "\n  dependent";
  for (const auto& v : m.dependent) out << " " << v;
  out << "\n  order " << m.order << "\n";
  if (!m.equations.empty()) {
    out << "system:\n";
    for (const auto& e : m.equations) out << "  eq " << e << "\n";
    for (const auto& s : m.solved) out << "  solve " << s << "\n";
  }
  if (!m.xi.empty() || !m.phi.empty()) {
    out << "group:\n";
    for (const auto& e : m.xi) out << "  xi " << e << "\n";
    for (const auto& e : m.phi) out << "  phi " << e << "\n";
    if (m.linear_in_u) out << "  linear\n";
  }
  if (!m.gen_xi.empty() || !m.gen_phi.empty()) {
    out << "generator:\n";
    for (const auto& e : m.gen_xi) out << "  xi " << e << "\n";
    for (const auto& e : m.gen_phi) out << "  phi " << e << "\n";
  }
  if (!m.net_components.empty() || m.shock || !m.domain.empty()) {
    out << "net:\n";
    for (const auto& e : m.net_components) out << "  component " << e << "\n";
    if (m.shock)
      out << "  shock " << m.shock->left << " " << m.shock->right << " "
          << m.shock->speed << "\n";
    if (m.net_layer) out << "  layer " << *m.net_layer << "\n";
    for (const auto& d : m.domain)
      out << "  domain " << d.first << " " << d.second << "\n";
  }
  if (!m.scenario_name.empty() || !m.params.empty() || !m.flux.empty()) {
    out << "scenario:\n";
    if (!m.scenario_name.empty()) out << "  name " << m.scenario_name << "\n";
    for (const auto& [k, v] : m.params) out << "  set " << k << " " << v << "\n";
    if (!m.flux.empty()) out << "  flux " << m.flux << "\n";
  }
  return out.str();
}

namespace {

// parse with the source position attached on failure
Expr parse_at(const std::string& text, const SymbolTable& table,
              const ModelFile& m, const std::string& key) {
  auto it = m.positions.find(key);
  int line = it == m.positions.end() ? 0 : it->second.first;
  int col = it == m.positions.end() ? 0 : it->second.second;
  try {
    return parse(text, table);
  } catch (const ParseError& e) {
    throw ModelError(e.what(), line, col + (int)e.position);
  } catch (const SymbolError& e) {
    throw ModelError(e.what(), line, col);
  }
}

}  // namespace

CompiledModel compile_model(const ModelFile& m) {
  if (m.independent.empty() || m.dependent.empty())
    throw ModelError("vars section must declare independent and dependent",
                     1, 1);
  CompiledModel c;
  c.table = std::make_unique<SymbolTable>();
  c.spec = std::make_unique<JetSpec>(m.independent, m.dependent, m.order,
                                     *c.table);

  if (!m.equations.empty()) {
    std::vector<Expr> delta;
    for (size_t i = 0; i < m.equations.size(); ++i)
      delta.push_back(
          parse_at(m.equations[i], *c.table, m, "eq:" + std::to_string(i)));
    std::vector<int> solved;
    for (size_t i = 0; i < m.solved.size(); ++i) {
      std::string key = "solve:" + std::to_string(i);
      auto id = c.table->lookup(m.solved[i]);
      int k = id ? c.spec->index_of(*id) : -1;
      if (k < c.spec->p()) {
        auto it = m.positions.find(key);
        throw ModelError("'" + m.solved[i] + "' is not a jet coordinate",
                         it == m.positions.end() ? 0 : it->second.first,
                         it == m.positions.end() ? 0 : it->second.second);
      }
      solved.push_back(k);
    }
    c.sys = build_pde_system(*c.spec, std::move(delta), std::move(solved),
                             *c.table);
  }

  if (!m.xi.empty() || !m.phi.empty()) {
    if ((int)m.xi.size() != c.spec->p() || (int)m.phi.size() != c.spec->q())
      throw ModelError("group needs one xi per independent and one phi per "
                       "dependent variable",
                       1, 1);
    GroupAction g;
    for (size_t i = 0; i < m.xi.size(); ++i)
      g.Xi.push_back(parse_at(m.xi[i], *c.table, m, "xi:" + std::to_string(i)));
    for (size_t i = 0; i < m.phi.size(); ++i)
      g.Phi.push_back(
          parse_at(m.phi[i], *c.table, m, "phi:" + std::to_string(i)));
    g.linear_in_u = m.linear_in_u;
    c.group = std::move(g);
  }

  if (!m.gen_xi.empty() || !m.gen_phi.empty()) {
    if ((int)m.gen_xi.size() != c.spec->p() ||
        (int)m.gen_phi.size() != c.spec->q())
      throw ModelError("generator needs one xi per independent and one phi "
                       "per dependent variable",
                       1, 1);
    VectorField v;
    for (size_t i = 0; i < m.gen_xi.size(); ++i)
      v.xi.push_back(
          parse_at(m.gen_xi[i], *c.table, m, "gen_xi:" + std::to_string(i)));
    for (size_t i = 0; i < m.gen_phi.size(); ++i)
      v.phi.push_back(
          parse_at(m.gen_phi[i], *c.table, m, "gen_phi:" + std::to_string(i)));
    c.generator = std::move(v);
  }

  if (!m.net_components.empty() || m.shock) {
    GNet net;
    if (m.shock) {
      if (c.spec->p() < 2)
        throw ModelError("shock nets need two independent variables", 1, 1);
      Mollifier mol = make_bump_mollifier(*c.table, "theta");
      Expr shift = Expr::symbol(c.spec->independent(0)) -
                   Expr::number(m.shock->speed) *
                       Expr::symbol(c.spec->independent(1));
      GNet h = embed_heaviside(mol, shift, *c.table);
      net.u = {Expr::number(m.shock->left) +
               Expr::number(m.shock->right - m.shock->left) * h.u[0]};
      net.layer = shift;
      net.claims_bounded = true;
    }
    for (size_t i = 0; i < m.net_components.size(); ++i)
      net.u.push_back(parse_at(m.net_components[i], *c.table, m,
                               "net:" + std::to_string(i)));
    if ((int)net.u.size() != c.spec->q())
      throw ModelError("net needs one component per dependent variable", 1, 1);
    if (m.net_layer) net.layer = parse_at(*m.net_layer, *c.table, m, "layer");
    if ((int)m.domain.size() != c.spec->p())
      throw ModelError("net needs one domain interval per independent "
                       "variable",
                       1, 1);
    net.domain = m.domain;
    c.net = std::move(net);
  }

  return c;
}

}  // namespace weaksym
