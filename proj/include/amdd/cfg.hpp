#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "amdd/ir.hpp"
#include "amdd/types.hpp"

namespace amdd {

// Control-flow graphs and cyclomatic complexity M = E - N + 2P.

struct ControlFlowGraph {
  std::vector<std::string> nodes;
  std::vector<std::pair<std::string, std::string>> edges;  // parallel edges kept
  std::string label;

  bool has_node(const std::string& id) const {
    return std::find(nodes.begin(), nodes.end(), id) != nodes.end();
  }
};

enum class RiskBand { Low, Moderate, High, Severe };

inline const char* to_string(RiskBand b) {
  switch (b) {
    case RiskBand::Low: return "Low";
    case RiskBand::Moderate: return "Moderate";
    case RiskBand::High: return "High";
    case RiskBand::Severe: return "Severe";
  }
  return "?";
}

// Bands partition the positive integers: 1-10, 11-20, 21-50, >50.
inline RiskBand risk_band(long long m) {
  if (m < 1) throw std::invalid_argument("cyclomatic number must be >= 1");
  if (m <= 10) return RiskBand::Low;
  if (m <= 20) return RiskBand::Moderate;
  if (m <= 50) return RiskBand::High;
  return RiskBand::Severe;
}

struct ComplexityReport {
  long long E = 0;
  long long N = 0;
  long long P = 0;
  long long M = 0;
  RiskBand band = RiskBand::Low;
  std::string label;
};

namespace detail {

inline long long weakly_connected_components(const ControlFlowGraph& g) {
  std::map<std::string, std::string> parent;
  std::function<std::string(const std::string&)> find = [&](const std::string& x) {
    auto it = parent.find(x);
    if (it == parent.end() || it->second == x) return x;
    std::string root = find(it->second);
    parent[x] = root;
    return root;
  };
  for (const auto& n : g.nodes) parent[n] = n;
  for (const auto& [a, b] : g.edges) parent[find(a)] = find(b);
  std::set<std::string> roots;
  for (const auto& n : g.nodes) roots.insert(find(n));
  return static_cast<long long>(roots.size());
}

}  // namespace detail

inline ComplexityReport cyclomatic(const ControlFlowGraph& g) {
  if (g.nodes.empty())
    throw std::invalid_argument("cyclomatic: graph must have at least one node");
  for (const auto& [a, b] : g.edges)
    if (!g.has_node(a) || !g.has_node(b))
      throw std::invalid_argument("cyclomatic: edge endpoint outside node set (" + a +
                                  " -> " + b + ")");
  ComplexityReport r;
  r.label = g.label;
  r.E = static_cast<long long>(g.edges.size());
  r.N = static_cast<long long>(g.nodes.size());
  r.P = detail::weakly_connected_components(g);
  r.M = r.E - r.N + 2 * r.P;
  r.band = risk_band(r.M);
  return r;
}

// ---------------------------------------------------------------------------
// IR -> CFG
// ---------------------------------------------------------------------------

// Handler bodies are concatenated sequentially behind a dispatcher entry:
// dispatcher -> h1.entry, h1.exit -> h2.entry, ... A single-handler program
// needs no dispatcher. The result is weakly connected (P = 1).
inline ControlFlowGraph extract_cfg(const AgentProgramIR& program) {
  ControlFlowGraph g;
  g.label = program.agentName;
  if (program.handlers.empty()) {
    g.nodes.push_back(program.agentName + ".entry");
    return g;
  }

  auto qualify = [&](size_t h, const std::string& id) {
    return "h" + std::to_string(h) + "_" + id;
  };

  bool dispatcher = program.handlers.size() > 1;
  if (dispatcher) g.nodes.push_back("dispatch");

  std::string previousExit = dispatcher ? "dispatch" : "";
  for (size_t h = 0; h < program.handlers.size(); ++h) {
    const BasicBlockGraph& body = program.handlers[h].body;
    const BasicBlock* entry = body.entry();
    const BasicBlock* exit = body.exit();
    if (!entry || !exit)
      throw std::invalid_argument("handler '" + program.handlers[h].triggerAction +
                                  "' body needs Entry and Exit blocks");
    for (const auto& b : body.blocks) g.nodes.push_back(qualify(h, b.id));
    for (const auto& e : body.edges)
      g.edges.emplace_back(qualify(h, e.from), qualify(h, e.to));
    if (!previousExit.empty()) g.edges.emplace_back(previousExit, qualify(h, entry->id));
    previousExit = qualify(h, exit->id);
  }
  return g;
}

// ---------------------------------------------------------------------------
// DOT subset import/export
// ---------------------------------------------------------------------------

struct DotWarning {
  int line = 0;
  std::string message;
};

// `digraph <name> { a -> b; c; }`. Attribute lists are parsed and ignored
// with a warning; anything else is rejected with a position.
inline ControlFlowGraph import_cfg(const std::string& text,
                                   std::vector<DotWarning>* warnings = nullptr) {
  ControlFlowGraph g;
  size_t i = 0;
  int line = 1, col = 1;
  auto advance = [&]() {
    if (text[i] == '\n') { ++line; col = 1; } else { ++col; }
    ++i;
  };
  auto skip_ws = [&]() {
    while (i < text.size()) {
      if (std::isspace(static_cast<unsigned char>(text[i]))) { advance(); continue; }
      if (text[i] == '/' && i + 1 < text.size() && text[i + 1] == '/') {
        while (i < text.size() && text[i] != '\n') advance();
        continue;
      }
      break;
    }
  };
  auto word = [&]() {
    skip_ws();
    std::string out;
    while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) ||
                               text[i] == '_' || text[i] == '.')) {
      out.push_back(text[i]);
      advance();
    }
    return out;
  };

  std::string kw = word();
  if (kw != "digraph") throw ParseError("expected 'digraph'", line, col);
  std::string name = word();
  g.label = name;
  skip_ws();
  if (i >= text.size() || text[i] != '{') throw ParseError("expected '{'", line, col);
  advance();

  std::set<std::string> nodeSet;
  auto add_node = [&](const std::string& n) {
    if (nodeSet.insert(n).second) g.nodes.push_back(n);
  };

  while (true) {
    skip_ws();
    if (i >= text.size()) throw ParseError("unterminated digraph body", line, col);
    if (text[i] == '}') { advance(); break; }
    int wl = line, wc = col;
    std::string a = word();
    if (a.empty()) throw ParseError("expected node identifier", wl, wc);
    skip_ws();
    // optional attribute list on a node
    if (i < text.size() && text[i] == '[') {
      int al = line;
      while (i < text.size() && text[i] != ']') advance();
      if (i < text.size()) advance();
      if (warnings) warnings->push_back({al, "attributes ignored"});
      skip_ws();
    }
    if (i + 1 < text.size() && text[i] == '-' && text[i + 1] == '>') {
      advance();
      advance();
      int bl = line, bc = col;
      std::string b = word();
      if (b.empty()) throw ParseError("expected edge target identifier", bl, bc);
      skip_ws();
      if (i < text.size() && text[i] == '[') {
        int al = line;
        while (i < text.size() && text[i] != ']') advance();
        if (i < text.size()) advance();
        if (warnings) warnings->push_back({al, "attributes ignored"});
        skip_ws();
      }
      add_node(a);
      add_node(b);
      g.edges.emplace_back(a, b);
    } else {
      add_node(a);
    }
    skip_ws();
    if (i < text.size() && text[i] == ';') advance();
  }
  skip_ws();
  if (i < text.size()) throw ParseError("content after closing '}'", line, col);
  if (g.nodes.empty())
    throw ParseError("digraph body declares no nodes (N >= 1 required)", line, col);
  return g;
}

inline std::string export_cfg(const ControlFlowGraph& g) {
  std::ostringstream out;
  out << "digraph " << (g.label.empty() ? "g" : g.label) << " {\n";
  std::set<std::string> touched;
  for (const auto& [a, b] : g.edges) {
    touched.insert(a);
    touched.insert(b);
  }
  for (const auto& n : g.nodes)
    if (!touched.count(n)) out << "  " << n << ";\n";
  for (const auto& [a, b] : g.edges) out << "  " << a << " -> " << b << ";\n";
  out << "}\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Report output and comparison
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json report_to_json(const ComplexityReport& r) {
  nlohmann::ordered_json j;
  j["label"] = r.label;
  j["E"] = r.E;
  j["N"] = r.N;
  j["P"] = r.P;
  j["M"] = r.M;
  j["band"] = to_string(r.band);
  return j;
}

inline std::string report_table(const std::vector<ComplexityReport>& reports) {
  std::ostringstream out;
  out << "label            E     N     P     M  band\n";
  for (const auto& r : reports) {
    out << r.label;
    for (size_t i = r.label.size(); i < 15; ++i) out << ' ';
    auto cell = [&](long long v) {
      std::string s = std::to_string(v);
      for (size_t i = s.size(); i < 6; ++i) out << ' ';
      out << s;
    };
    cell(r.E);
    cell(r.N);
    cell(r.P);
    cell(r.M);
    out << "  " << to_string(r.band) << "\n";
  }
  return out.str();
}

struct ComparisonRow {
  std::string label;
  long long deltaM = 0;
  long long deltaE = 0;
  long long deltaN = 0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;  // ordered by label, totals row last
  std::vector<std::string> mismatches;
};

class LabelMismatchError : public std::runtime_error {
 public:
  LabelMismatchError(std::string msg, std::vector<std::string> labels)
      : std::runtime_error(std::move(msg)), labels(std::move(labels)) {}
  std::vector<std::string> labels;
};

inline ComparisonTable compare_reports(const std::vector<ComplexityReport>& a,
                                       const std::vector<ComplexityReport>& b) {
  std::map<std::string, const ComplexityReport*> byLabelA, byLabelB;
  for (const auto& r : a) byLabelA[r.label] = &r;
  for (const auto& r : b) byLabelB[r.label] = &r;

  std::vector<std::string> mismatches;
  for (const auto& [label, _] : byLabelA)
    if (!byLabelB.count(label)) mismatches.push_back(label + " (only in first)");
  for (const auto& [label, _] : byLabelB)
    if (!byLabelA.count(label)) mismatches.push_back(label + " (only in second)");
  if (!mismatches.empty()) {
    std::string msg = "report labels do not align:";
    for (const auto& m : mismatches) msg += " " + m + ";";
    throw LabelMismatchError(msg, mismatches);
  }

  ComparisonTable table;
  ComparisonRow totals{"TOTAL", 0, 0, 0};
  for (const auto& [label, ra] : byLabelA) {
    const ComplexityReport* rb = byLabelB[label];
    ComparisonRow row{label, rb->M - ra->M, rb->E - ra->E, rb->N - ra->N};
    totals.deltaM += row.deltaM;
    totals.deltaE += row.deltaE;
    totals.deltaN += row.deltaN;
    table.rows.push_back(row);
  }
  table.rows.push_back(totals);
  return table;
}

}  // namespace amdd
