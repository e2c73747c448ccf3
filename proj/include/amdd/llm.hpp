#pragma once

#include <chrono>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "amdd/codegen.hpp"
#include "amdd/types.hpp"

namespace amdd {

// Chat-completion style client for the generation backend. The transport is
// injectable so the retry/extraction logic is testable without a network.

struct LlmEndpointConfig {
  std::string baseUrl;            // e.g. http://localhost:8080
  std::string model;              // model identifier
  double temperature = 0.0;
  int maxRetries = 2;             // retries after the first attempt
  std::string tokenEnvVar = "AMDD_LLM_TOKEN";
};

struct HttpResponse {
  int status = 0;
  std::string body;
  std::string error;  // transport-level failure (no HTTP status)
};

// (url, authToken, requestBody) -> response
using LlmTransport =
    std::function<HttpResponse(const std::string&, const std::string&, const std::string&)>;

class LlmError : public std::runtime_error {
 public:
  LlmError(std::string msg, std::string log)
      : std::runtime_error(std::move(msg)), backendLog(std::move(log)) {}
  std::string backendLog;
};

namespace detail {

// All fenced code blocks; filename from a preceding "// file:" (or "# file:")
// comment line when present.
inline std::vector<SourceUnit> extract_code_fences(const std::string& body,
                                                   const std::string& dialect) {
  std::vector<SourceUnit> units;
  std::istringstream in(body);
  std::string line, pendingFile, lastLine;
  bool inFence = false;
  std::string current;
  int anonymous = 0;
  std::string ext = dialect.substr(0, dialect.find('-'));
  if (ext.empty()) ext = "txt";

  while (std::getline(in, line)) {
    std::string trimmed = line;
    while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == ' '))
      trimmed.pop_back();
    if (trimmed.rfind("```", 0) == 0) {
      if (!inFence) {
        inFence = true;
        current.clear();
        pendingFile.clear();
        for (const std::string& prefix : {std::string("// file:"), std::string("# file:")}) {
          if (lastLine.rfind(prefix, 0) == 0) {
            pendingFile = lastLine.substr(prefix.size());
            size_t b = pendingFile.find_first_not_of(' ');
            if (b != std::string::npos) pendingFile = pendingFile.substr(b);
          }
        }
      } else {
        inFence = false;
        std::string filename = pendingFile;
        if (filename.empty())
          filename = "agent_" + std::to_string(++anonymous) + "." + ext;
        units.push_back({filename, current});
      }
      lastLine = trimmed;
      continue;
    }
    if (inFence) {
      current += line + "\n";
    }
    lastLine = trimmed;
  }
  return units;
}

}  // namespace detail

#ifndef AMDD_NO_HTTPLIB
LlmTransport make_http_transport();
#endif

inline GenerationResult generate_llm(const PromptBundle& bundle,
                                     const LlmEndpointConfig& client,
                                     const LlmTransport& transport,
                                     std::function<void(int)> backoffSleepMs = {}) {
  const char* token = std::getenv(client.tokenEnvVar.c_str());
  std::string auth = token ? token : "";

  nlohmann::ordered_json request;
  request["model"] = client.model;
  request["temperature"] = client.temperature;
  request["messages"] = nlohmann::ordered_json::array(
      {{{"role", "system"}, {"content", bundle.directives}},
       {{"role", "user"}, {"content", bundle.structuralSection + "\n" +
                                          bundle.behavioralSection + "\n" +
                                          bundle.constraintsSection}}});
  std::string requestBody = request.dump(2);

  std::ostringstream log;
  log << "backend=llm model=" << client.model << " url=" << client.baseUrl
      << " bundle=" << bundle.checksum << " auth=" << (auth.empty() ? "absent" : "<redacted>")
      << "\n";
  log << "--- request ---\n" << requestBody << "\n";

  HttpResponse response;
  int attempts = 0;
  while (true) {
    ++attempts;
    response = transport(client.baseUrl, auth, requestBody);
    log << "attempt " << attempts << ": "
        << (response.error.empty() ? "status " + std::to_string(response.status)
                                   : "transport error: " + response.error)
        << "\n";
    bool retryable = !response.error.empty() || response.status >= 500;
    if (!retryable) break;
    if (attempts > client.maxRetries)
      throw LlmError("LLM transport failed after " + std::to_string(attempts) +
                         " attempts",
                     log.str());
    int delayMs = 100 << (attempts - 1);
    if (backoffSleepMs)
      backoffSleepMs(delayMs);
    else
      std::this_thread::sleep_for(std::chrono::milliseconds(delayMs));
  }
  if (response.status < 200 || response.status >= 300)
    throw LlmError("LLM endpoint returned status " + std::to_string(response.status),
                   log.str());

  // Chat-completion reply; fall back to the raw body when it is not JSON.
  std::string content = response.body;
  try {
    auto j = nlohmann::json::parse(response.body);
    if (j.contains("choices") && !j["choices"].empty())
      content = j["choices"][0]["message"]["content"].get<std::string>();
  } catch (const nlohmann::json::exception&) {
  }
  log << "--- response ---\n" << content << "\n";

  GenerationResult result;
  result.sourceUnits = detail::extract_code_fences(content, "java-like");
  result.backendLog = log.str();
  if (result.sourceUnits.empty())
    throw LlmError("LLM response contains no fenced code blocks", log.str());
  return result;
}

}  // namespace amdd

#ifndef AMDD_NO_HTTPLIB
#include <httplib.h>

namespace amdd {

inline LlmTransport make_http_transport() {
  return [](const std::string& baseUrl, const std::string& auth,
            const std::string& body) -> HttpResponse {
    httplib::Client client(baseUrl);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    httplib::Headers headers;
    if (!auth.empty()) headers.emplace("Authorization", "Bearer " + auth);
    auto res = client.Post("/v1/chat/completions", headers, body, "application/json");
    if (!res) return {0, "", httplib::to_string(res.error())};
    return {res->status, res->body, ""};
  };
}

}  // namespace amdd
#endif
