#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace amdd {

// Semantic type tags shared by model attributes and ontology slots.
enum class SemanticType { Id, String, Integer, Real, Enum, Boolean };

inline const char* to_string(SemanticType t) {
  switch (t) {
    case SemanticType::Id: return "id";
    case SemanticType::String: return "string";
    case SemanticType::Integer: return "integer";
    case SemanticType::Real: return "real";
    case SemanticType::Enum: return "enum";
    case SemanticType::Boolean: return "boolean";
  }
  return "?";
}

inline std::optional<SemanticType> semantic_type_from(const std::string& s) {
  if (s == "id") return SemanticType::Id;
  if (s == "string") return SemanticType::String;
  if (s == "integer" || s == "int") return SemanticType::Integer;
  if (s == "real" || s == "float" || s == "double") return SemanticType::Real;
  if (s == "enum") return SemanticType::Enum;
  if (s == "boolean" || s == "bool") return SemanticType::Boolean;
  return std::nullopt;
}

// Runtime value for attribute valuations and message slots.
// Monostate stands for "unset"; comparisons against it are never
// silently true.
using Value = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

inline bool is_unset(const Value& v) {
  return std::holds_alternative<std::monostate>(v);
}

std::string value_to_string(const Value& v);

inline std::string value_to_string(const Value& v) {
  struct V {
    std::string operator()(std::monostate) const { return "<unset>"; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const {
      std::string s = std::to_string(d);
      return s;
    }
    std::string operator()(const std::string& s) const { return s; }
  };
  return std::visit(V{}, v);
}

// Positioned error for all the textual front ends (PlantUML, OCL,
// ontology, DOT, trace files). Lines and columns are 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, int line, int column)
      : std::runtime_error(format(message, line, column)),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string format(const std::string& m, int line, int col) {
    return std::to_string(line) + ":" + std::to_string(col) + ": " + m;
  }
  int line_ = 0;
  int column_ = 0;
};

// Hyphenated names like "UVF-Manager" normalize to "UVFManager"; the
// original spelling is kept by callers as a display label.
inline std::string normalize_identifier(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (c != '-') out.push_back(c);
  }
  return out;
}

inline bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

// FNV-1a, used for prompt-bundle checksums and artifact naming.
inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace amdd
