// amdd: model pipeline driver — validate, prompt, generate, analyze,
// simulate, conform. Exit codes: 0 ok, 1 input/validation, 2 backend
// transport, 3 runtime constraint violation, 4 conformance violation.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "amdd/cfg.hpp"
#include "amdd/codegen.hpp"
#include "amdd/conformance.hpp"
#include "amdd/constraints.hpp"
#include "amdd/llm.hpp"
#include "amdd/model.hpp"
#include "amdd/model_json.hpp"
#include "amdd/ontology.hpp"
#include "amdd/plantuml.hpp"
#include "amdd/sim.hpp"
#include "amdd/toml_lite.hpp"
#include "amdd/types.hpp"

namespace fs = std::filesystem;
using namespace amdd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitTransport = 2;
constexpr int kExitConstraint = 3;
constexpr int kExitConformance = 4;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << content;
}

struct Project {
  fs::path configDir;
  TomlTable toml;
  SystemModel model;
  ConstraintSet constraints;
  BoundConstraints bound;
  OntologyRegistry registry;
  fs::path outDir;
};

fs::path resolve(const Project& p, const std::string& rel) {
  fs::path path(rel);
  return path.is_absolute() ? path : p.configDir / path;
}

Project load_project(const std::string& configPath, const std::string& outOverride) {
  Project p;
  fs::path cfg(configPath);
  p.configDir = cfg.parent_path();
  p.toml = parse_toml(read_file(cfg));

  auto need = [&](const std::string& key) {
    auto v = p.toml.get_string(key);
    if (!v) throw std::runtime_error("config is missing key '" + key + "'");
    return *v;
  };

  p.model.modelName = p.toml.get_string("model.name").value_or("model");
  p.model.version = p.toml.get_string("model.version").value_or("1.0");

  {
    DiagramSource src{DiagramKind::Class, read_file(resolve(p, need("model.classes"))),
                      need("model.classes")};
    auto [classes, relationships] = parse_class_diagram(src);
    p.model.classes = classes;
    p.model.relationships = relationships;
  }
  if (auto statePath = p.toml.get_string("model.state")) {
    DiagramSource src{DiagramKind::State, read_file(resolve(p, *statePath)), *statePath};
    p.model.stateMachines.push_back(parse_state_diagram(src));
  }
  if (auto actPath = p.toml.get_string("model.activity")) {
    DiagramSource src{DiagramKind::Activity, read_file(resolve(p, *actPath)), *actPath};
    p.model.activities.push_back(parse_activity_diagram(src, "mission"));
  }

  ValidationReport report = validate_model(p.model);
  if (!report.ok()) {
    std::string msg = "model validation failed:";
    for (const auto& i : report.issues) msg += "\n  " + i.location + ": " + i.message;
    throw std::runtime_error(msg);
  }

  if (auto oclPath = p.toml.get_string("model.constraints"))
    p.constraints = parse_constraints(read_file(resolve(p, *oclPath)));
  p.bound = bind(p.constraints, p.model);

  if (auto ontoPath = p.toml.get_string("model.ontology"))
    p.registry = parse_ontology(read_file(resolve(p, *ontoPath)));

  std::string out = outOverride.empty()
                        ? p.toml.get_string("output.dir").value_or("artifacts")
                        : outOverride;
  p.outDir = fs::path(out).is_absolute() ? fs::path(out) : p.configDir / out;
  return p;
}

GenerationConfig generation_config(const Project& p, const std::string& ontologyFlag) {
  GenerationConfig cfg;
  cfg.dialect = p.toml.get_string("generation.dialect").value_or("py-agent");
  cfg.includeOntology = p.toml.get_bool("generation.ontology").value_or(true);
  cfg.seed = p.toml.get_int("generation.seed").value_or(0);
  if (ontologyFlag == "on") cfg.includeOntology = true;
  if (ontologyFlag == "off") cfg.includeOntology = false;
  return cfg;
}

const OntologyRegistry* registry_or_null(const Project& p, const GenerationConfig& cfg) {
  if (!cfg.includeOntology || p.registry.empty()) return nullptr;
  return &p.registry;
}

// --- commands --------------------------------------------------------------

int cmd_validate(const std::string& configPath) {
  Project p = load_project(configPath, "");
  std::cout << "model '" << p.model.modelName << "' v" << p.model.version << ": "
            << p.model.classes.size() << " classes, " << p.model.relationships.size()
            << " relationships, " << p.model.stateMachines.size() << " state machines, "
            << p.model.activities.size() << " activities\n";
  std::cout << "constraints: " << p.constraints.size() << " bound\n";
  std::cout << "ontology: " << p.registry.concepts.size() << " concepts, "
            << p.registry.predicates.size() << " predicates, "
            << p.registry.actions.size() << " actions\n";
  std::cout << "ok\n";
  return kExitOk;
}

int cmd_prompt(const std::string& configPath, const std::string& outOverride,
               const std::string& ontologyFlag) {
  Project p = load_project(configPath, outOverride);
  GenerationConfig cfg = generation_config(p, ontologyFlag);
  PromptBundle bundle = assemble_prompt(p.model, p.bound, registry_or_null(p, cfg), cfg);
  fs::path dir = p.outDir / "prompt";
  write_file(dir / "structural.txt", bundle.structuralSection);
  write_file(dir / "behavioral.txt", bundle.behavioralSection);
  write_file(dir / "constraints.txt", bundle.constraintsSection);
  write_file(dir / "bundle.txt", bundle.combined());
  write_file(dir / "checksum.txt", bundle.checksum + "\n");
  std::cout << "prompt bundle written to " << dir.string() << " (checksum "
            << bundle.checksum << ")\n";
  return kExitOk;
}

int write_template_artifacts(const Project& p, const GenerationResult& result) {
  fs::path dir = p.outDir / "generated";
  std::vector<ComplexityReport> reports;
  for (const auto& program : result.programs) {
    write_file(dir / (program.agentName + ".ir.json"),
               program_to_json(program).dump(2) + "\n");
    ControlFlowGraph g = extract_cfg(program);
    write_file(dir / (program.agentName + ".cfg.dot"), export_cfg(g));
    reports.push_back(cyclomatic(g));
  }
  nlohmann::ordered_json analysis = nlohmann::ordered_json::array();
  for (const auto& r : reports) analysis.push_back(report_to_json(r));
  write_file(dir / "analysis.json", analysis.dump(2) + "\n");
  write_file(dir / "analysis.txt", report_table(reports));
  write_file(dir / "backend.log", result.backendLog);
  std::cout << report_table(reports);
  return kExitOk;
}

int cmd_generate(const std::string& configPath, const std::string& outOverride,
                 const std::string& backend, const std::string& ontologyFlag) {
  Project p = load_project(configPath, outOverride);
  GenerationConfig cfg = generation_config(p, ontologyFlag);
  cfg.backend = backend == "llm" ? Backend::Llm : Backend::Template;

  if (cfg.backend == Backend::Template) {
    GenerationResult result =
        generate_template(p.model, p.bound, registry_or_null(p, cfg), cfg);
    return write_template_artifacts(p, result);
  }

  PromptBundle bundle = assemble_prompt(p.model, p.bound, registry_or_null(p, cfg), cfg);
  LlmEndpointConfig client;
  client.baseUrl = p.toml.get_string("llm.base_url").value_or("http://localhost:8080");
  client.model = p.toml.get_string("llm.model").value_or("gpt-4");
  client.temperature = p.toml.get_real("llm.temperature").value_or(0.0);
  client.maxRetries = static_cast<int>(p.toml.get_int("llm.max_retries").value_or(2));

  auto transcript_path = [&]() { return p.outDir / "llm" / (bundle.checksum + ".log"); };
  auto timestamp = [] {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return std::string(buf);
  };

  try {
    GenerationResult result = generate_llm(bundle, client, make_http_transport());
    write_file(transcript_path(), "timestamp=" + timestamp() + "\n" + result.backendLog);
    for (const auto& unit : result.sourceUnits)
      write_file(p.outDir / "generated" / "src" / unit.filename, unit.text);
    std::cout << result.sourceUnits.size() << " source files written, transcript at "
              << transcript_path().string() << "\n";
    return kExitOk;
  } catch (const LlmError& e) {
    // partial artifacts retained: the transcript documents the failed exchange
    write_file(transcript_path(), "timestamp=" + timestamp() + "\n" + e.backendLog);
    std::cerr << "error: " << e.what() << " (transcript at " << transcript_path().string()
              << ")\n";
    return kExitTransport;
  }
}

int cmd_analyze(const std::vector<std::string>& inputs, const std::string& outPath) {
  auto collect = [](const std::string& input) {
    std::vector<fs::path> files;
    fs::path path(input);
    if (fs::is_directory(path)) {
      for (const auto& entry : fs::directory_iterator(path))
        if (entry.path().extension() == ".dot") files.push_back(entry.path());
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(path);
    }
    return files;
  };

  bool failures = false;
  auto analyze_set = [&](const std::string& input) {
    std::vector<ComplexityReport> reports;
    for (const fs::path& file : collect(input)) {
      try {
        std::vector<DotWarning> warnings;
        ControlFlowGraph g = import_cfg(read_file(file), &warnings);
        for (const auto& w : warnings)
          std::cerr << file.string() << ":" << w.line << ": warning: " << w.message
                    << "\n";
        reports.push_back(cyclomatic(g));
      } catch (const std::exception& e) {
        std::cerr << "error: " << file.string() << ": " << e.what() << "\n";
        failures = true;
      }
    }
    std::sort(reports.begin(), reports.end(),
              [](const ComplexityReport& a, const ComplexityReport& b) {
                return a.label < b.label;
              });
    return reports;
  };

  std::vector<std::vector<ComplexityReport>> sets;
  for (const auto& input : inputs) sets.push_back(analyze_set(input));

  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (size_t i = 0; i < sets.size(); ++i) {
    if (sets.size() > 1) std::cout << "== " << inputs[i] << " ==\n";
    std::cout << report_table(sets[i]);
    nlohmann::ordered_json group = nlohmann::ordered_json::array();
    for (const auto& r : sets[i]) group.push_back(report_to_json(r));
    out.push_back({{"input", inputs[i]}, {"reports", group}});
  }

  if (sets.size() == 2) {
    try {
      ComparisonTable table = compare_reports(sets[0], sets[1]);
      std::cout << "== comparison (second - first) ==\n";
      std::cout << "label            dM    dE    dN\n";
      nlohmann::ordered_json deltas = nlohmann::ordered_json::array();
      for (const auto& row : table.rows) {
        std::cout << row.label;
        for (size_t i = row.label.size(); i < 15; ++i) std::cout << ' ';
        auto cell = [&](long long v) {
          std::string s = (v > 0 ? "+" : "") + std::to_string(v);
          for (size_t i = s.size(); i < 6; ++i) std::cout << ' ';
          std::cout << s;
        };
        cell(row.deltaM);
        cell(row.deltaE);
        cell(row.deltaN);
        std::cout << "\n";
        deltas.push_back({{"label", row.label},
                          {"dM", row.deltaM},
                          {"dE", row.deltaE},
                          {"dN", row.deltaN}});
      }
      out.push_back({{"comparison", deltas}});
    } catch (const LabelMismatchError& e) {
      std::cerr << "error: " << e.what() << "\n";
      failures = true;
    }
  }

  if (!outPath.empty()) write_file(outPath, out.dump(2) + "\n");
  return failures ? kExitInput : kExitOk;
}

int cmd_simulate(const std::string& configPath, const std::string& outOverride,
                 long long uvCountFlag, long long seedFlag,
                 const std::vector<int>& offline, const std::vector<int>& unregistered,
                 const std::vector<int>& controlled) {
  Project p = load_project(configPath, outOverride);

  SimConfig cfg;
  cfg.uvCount = static_cast<int>(
      uvCountFlag >= 0 ? uvCountFlag : p.toml.get_int("simulation.uv_count").value_or(2));
  cfg.seed = seedFlag != std::numeric_limits<long long>::min()
                 ? seedFlag
                 : p.toml.get_int("simulation.seed").value_or(0);
  cfg.successThreshold = p.toml.get_real("simulation.success_threshold").value_or(50.0);
  cfg.availability.assign(cfg.uvCount, true);
  cfg.registration.assign(cfg.uvCount, true);
  cfg.initialControlled.assign(cfg.uvCount, false);
  auto apply = [&](const std::vector<int>& indices, std::vector<bool>& mask, bool value) {
    for (int i : indices) {
      if (i < 0 || i >= cfg.uvCount)
        throw std::runtime_error("UV index " + std::to_string(i) + " out of range");
      mask[i] = value;
    }
  };
  apply(offline, cfg.availability, false);
  apply(unregistered, cfg.registration, false);
  apply(controlled, cfg.initialControlled, true);

  fs::path dir = p.outDir / "sim";
  auto persist = [&](const MessageTrace& trace) {
    write_file(dir / "trace.jsonl", write_trace(trace));
    write_file(dir / "sequence.puml", render_sequence_diagram(trace));
    std::ostringstream summary;
    summary << "messages: " << trace.messages.size() << "\n";
    summary << "aborted: " << (trace.aborted ? "true" : "false") << "\n";
    for (const auto& [id, state] : trace.finalStates)
      summary << id << ": " << (state.empty() ? "-" : state) << "\n";
    write_file(dir / "summary.txt", summary.str());
  };

  try {
    MessageTrace trace = run_mission(cfg, p.model, p.bound, p.registry);
    persist(trace);
    std::cout << trace.messages.size() << " messages"
              << (trace.aborted ? " (mission aborted)" : "") << ", artifacts in "
              << dir.string() << "\n";
    return kExitOk;
  } catch (const SimConstraintViolation& e) {
    persist(e.trace);  // trace retained for post-mortem
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& v : e.violations)
      std::cerr << "  " << v.constraintName << " on " << v.instanceId << ": "
                << v.renderedExpr << " (" << v.actualValues << ")\n";
    return kExitConstraint;
  }
}

int cmd_conform(const std::string& configPath, const std::string& tracePath,
                bool strict) {
  Project p = load_project(configPath, "");
  if (p.model.activities.empty())
    throw std::runtime_error("config declares no activity diagram to derive the protocol");

  MessageTrace trace;
  try {
    trace = read_trace(read_file(tracePath.empty()
                                     ? (p.outDir / "sim" / "trace.jsonl").string()
                                     : tracePath));
  } catch (const std::exception& e) {
    std::cerr << "error: malformed trace: " << e.what() << "\n";
    return kExitInput;
  }

  ExpectedProtocol protocol = derive_expected(p.model.activities.front());
  for (const auto& w : protocol.warnings) std::cerr << "warning: " << w << "\n";
  ConformanceReport report = check_trace(trace, protocol, strict);
  std::cout << conformance_text(report);
  std::cout << conformance_to_json(report).dump(2) << "\n";
  return report.verdict == Verdict::Violating ? kExitConformance : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"model pipeline: validate, prompt, generate, analyze, simulate, conform"};
  app.require_subcommand(1);

  std::string config = "uvf.toml";
  std::string out;
  std::string ontologyFlag;  // "", "on", "off"
  std::string backend = "template";
  std::string tracePath;
  std::vector<std::string> analyzeInputs;
  std::string analyzeOut;
  long long uvCount = -1;
  long long seed = std::numeric_limits<long long>::min();
  std::vector<int> offline, unregistered, controlled;
  bool strict = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "project TOML file");
    cmd->add_option("--out", out, "artifacts directory (overrides config)");
  };

  CLI::App* validate = app.add_subcommand("validate", "parse and check all inputs");
  validate->add_option("--config", config, "project TOML file");

  CLI::App* prompt = app.add_subcommand("prompt", "write the generation prompt bundle");
  add_common(prompt);
  prompt->add_option("--ontology", ontologyFlag, "on|off")
      ->check(CLI::IsMember({"on", "off"}));

  CLI::App* generate = app.add_subcommand("generate", "run a generation backend");
  add_common(generate);
  generate->add_option("--backend", backend, "template|llm")
      ->check(CLI::IsMember({"template", "llm"}));
  generate->add_option("--ontology", ontologyFlag, "on|off")
      ->check(CLI::IsMember({"on", "off"}));

  CLI::App* analyze = app.add_subcommand("analyze", "complexity reports for CFG files");
  analyze->add_option("inputs", analyzeInputs, "DOT files or directories")->required();
  analyze->add_option("--out", analyzeOut, "write JSON report to this path");

  CLI::App* simulate = app.add_subcommand("simulate", "run the mission simulation");
  add_common(simulate);
  simulate->add_option("--uv-count", uvCount, "number of UVs");
  simulate->add_option("--seed", seed, "score-model seed");
  simulate->add_option("--offline", offline, "UV indices that are unavailable");
  simulate->add_option("--unregistered", unregistered, "UV indices not registered");
  simulate->add_option("--controlled", controlled,
                       "UV indices starting in Controlled (fault injection)");

  CLI::App* conform = app.add_subcommand("conform", "check a trace against the protocol");
  conform->add_option("--config", config, "project TOML file");
  conform->add_option("--trace", tracePath, "trace JSONL file (default: artifacts)");
  conform->add_flag("--strict", strict, "treat novel events as violations");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(config);
    if (prompt->parsed()) return cmd_prompt(config, out, ontologyFlag);
    if (generate->parsed()) return cmd_generate(config, out, backend, ontologyFlag);
    if (analyze->parsed()) return cmd_analyze(analyzeInputs, analyzeOut);
    if (simulate->parsed())
      return cmd_simulate(config, out, uvCount, seed, offline, unregistered, controlled);
    if (conform->parsed()) return cmd_conform(config, tracePath, strict);
  } catch (const LlmError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTransport;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
