#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "amdd/model.hpp"
#include "amdd/types.hpp"

namespace amdd {

enum class ConstraintKind { Uniqueness, Cardinality, Value, Precondition, Postcondition };

inline const char* to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::Uniqueness: return "Uniqueness";
    case ConstraintKind::Cardinality: return "Cardinality";
    case ConstraintKind::Value: return "Value";
    case ConstraintKind::Precondition: return "Precondition";
    case ConstraintKind::Postcondition: return "Postcondition";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Expression tree
// ---------------------------------------------------------------------------

namespace ocl {

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };
enum class BoolOp { And, Or, Implies };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind {
    Literal,     // value
    Navigation,  // self.attr [@pre]
    Compare,     // lhs op rhs
    Logical,     // lhs op rhs
    Not,         // operand
    IsUnique,    // Class.allInstances()->isUnique(attr)
    SizeOf,      // self.link->size()
    InState,     // self.oclInState(StateName)
  };
  Kind kind;
  Value literal;
  std::string name;   // attribute / link / state / class name
  std::string extra;  // isUnique attribute
  bool atPre = false;
  CompareOp cmp{};
  BoolOp logic{};
  ExprPtr lhs, rhs, operand;
};

inline ExprPtr make_literal(Value v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Literal;
  e->literal = std::move(v);
  return e;
}

inline const char* to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "<>";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

inline std::string render(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::Literal:
      if (std::holds_alternative<std::string>(e->literal))
        return "'" + std::get<std::string>(e->literal) + "'";
      return value_to_string(e->literal);
    case Expr::Kind::Navigation:
      return "self." + e->name + (e->atPre ? "@pre" : "");
    case Expr::Kind::Compare:
      return render(e->lhs) + " " + to_string(e->cmp) + " " + render(e->rhs);
    case Expr::Kind::Logical: {
      const char* op = e->logic == BoolOp::And ? "and"
                       : e->logic == BoolOp::Or ? "or"
                                                : "implies";
      return "(" + render(e->lhs) + " " + op + " " + render(e->rhs) + ")";
    }
    case Expr::Kind::Not:
      return "not " + render(e->operand);
    case Expr::Kind::IsUnique:
      return e->name + ".allInstances()->isUnique(" + e->extra + ")";
    case Expr::Kind::SizeOf:
      return "self." + e->name + "->size()";
    case Expr::Kind::InState:
      return "self.oclInState(" + e->name + ")";
  }
  return "?";
}

template <typename Fn>
void visit(const ExprPtr& e, Fn&& fn) {
  fn(*e);
  if (e->lhs) visit(e->lhs, fn);
  if (e->rhs) visit(e->rhs, fn);
  if (e->operand) visit(e->operand, fn);
}

// --- Lexing / parsing ------------------------------------------------------

struct Token {
  std::string text;
  int line = 0;
  int col = 0;
};

inline std::vector<Token> lex(const std::string& text, int startLine) {
  std::vector<Token> tokens;
  int line = startLine, col = 1;
  size_t i = 0;
  auto advance = [&](char c) {
    if (c == '\n') { ++line; col = 1; } else { ++col; }
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(c);
      ++i;
      continue;
    }
    int tl = line, tc = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string word;
      while (i < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) {
        word.push_back(text[i]);
        advance(text[i]);
        ++i;
      }
      tokens.push_back({word, tl, tc});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string num;
      bool isReal = false;
      while (i < text.size() &&
             (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.')) {
        if (text[i] == '.') {
          if (i + 1 < text.size() && text[i + 1] == '.') break;  // range elsewhere
          isReal = true;
        }
        num.push_back(text[i]);
        advance(text[i]);
        ++i;
      }
      tokens.push_back({num, tl, tc});
      continue;
    }
    if (c == '\'' || c == '"') {
      char quote = c;
      std::string s(1, c);
      advance(c);
      ++i;
      while (i < text.size() && text[i] != quote) {
        s.push_back(text[i]);
        advance(text[i]);
        ++i;
      }
      if (i >= text.size()) throw ParseError("unterminated string literal", tl, tc);
      s.push_back(quote);
      advance(text[i]);
      ++i;
      tokens.push_back({s, tl, tc});
      continue;
    }
    // multi-char operators
    static const char* two[] = {"<=", ">=", "<>", "->"};
    bool matched = false;
    for (const char* op : two) {
      if (text.compare(i, 2, op) == 0) {
        tokens.push_back({op, tl, tc});
        advance(text[i]);
        advance(text[i + 1]);
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    tokens.push_back({std::string(1, c), tl, tc});
    advance(c);
    ++i;
  }
  return tokens;
}

class ExprParser {
 public:
  ExprParser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
    if (!tokens_.empty()) {
      eof_.line = tokens_.back().line;
      eof_.col = tokens_.back().col + static_cast<int>(tokens_.back().text.size());
    }
  }

  ExprPtr parse() {
    ExprPtr e = parse_implies();
    if (pos_ < tokens_.size())
      throw ParseError("unexpected token '" + tokens_[pos_].text + "'",
                       tokens_[pos_].line, tokens_[pos_].col);
    return e;
  }

 private:
  const Token& peek() const {
    return pos_ < tokens_.size() ? tokens_[pos_] : eof_;
  }
  bool accept(const std::string& t) {
    if (peek().text == t) { ++pos_; return true; }
    return false;
  }
  Token expect(const std::string& t) {
    if (peek().text != t)
      throw ParseError("expected '" + t + "', got '" + peek().text + "'", peek().line,
                       peek().col);
    return tokens_[pos_++];
  }
  Token take() {
    if (pos_ >= tokens_.size())
      throw ParseError("unexpected end of expression", peek().line, peek().col);
    return tokens_[pos_++];
  }

  ExprPtr parse_implies() {
    ExprPtr lhs = parse_or();
    if (accept("implies")) {
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Logical;
      e->logic = BoolOp::Implies;
      e->lhs = lhs;
      e->rhs = parse_implies();
      return e;
    }
    return lhs;
  }
  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (accept("or")) {
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Logical;
      e->logic = BoolOp::Or;
      e->lhs = lhs;
      e->rhs = parse_and();
      lhs = e;
    }
    return lhs;
  }
  ExprPtr parse_and() {
    ExprPtr lhs = parse_not();
    while (accept("and")) {
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Logical;
      e->logic = BoolOp::And;
      e->lhs = lhs;
      e->rhs = parse_not();
      lhs = e;
    }
    return lhs;
  }
  ExprPtr parse_not() {
    if (accept("not")) {
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Not;
      e->operand = parse_not();
      return e;
    }
    return parse_compare();
  }
  ExprPtr parse_compare() {
    ExprPtr lhs = parse_primary();
    static const std::map<std::string, CompareOp> ops = {
        {"=", CompareOp::Eq},  {"<>", CompareOp::Ne}, {"<", CompareOp::Lt},
        {"<=", CompareOp::Le}, {">", CompareOp::Gt},  {">=", CompareOp::Ge}};
    auto it = ops.find(peek().text);
    if (it == ops.end()) return lhs;
    ++pos_;
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Compare;
    e->cmp = it->second;
    e->lhs = lhs;
    e->rhs = parse_primary();
    return e;
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    if (accept("(")) {
      ExprPtr e = parse_implies();
      expect(")");
      return e;
    }
    if (t.text == "true" || t.text == "false") {
      ++pos_;
      return make_literal(t.text == "true");
    }
    if (!t.text.empty() && (t.text[0] == '\'' || t.text[0] == '"')) {
      ++pos_;
      return make_literal(t.text.substr(1, t.text.size() - 2));
    }
    if (!t.text.empty() && std::isdigit(static_cast<unsigned char>(t.text[0]))) {
      ++pos_;
      if (t.text.find('.') != std::string::npos)
        return make_literal(std::stod(t.text));
      return make_literal(static_cast<std::int64_t>(std::stoll(t.text)));
    }
    if (t.text == "self") {
      ++pos_;
      expect(".");
      Token member = peek();
      if (member.text == "oclInState") {
        ++pos_;
        expect("(");
        Token state = take();
        expect(")");
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::InState;
        e->name = state.text;
        return e;
      }
      take();
      // self.link->size()
      if (accept("->")) {
        Token call = take();
        if (call.text != "size")
          throw ParseError("unsupported collection operation '" + call.text + "'",
                           call.line, call.col);
        expect("(");
        expect(")");
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::SizeOf;
        e->name = member.text;
        return e;
      }
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Navigation;
      e->name = member.text;
      if (accept("@")) {
        Token pre = take();
        if (pre.text != "pre")
          throw ParseError("expected 'pre' after '@'", pre.line, pre.col);
        e->atPre = true;
      }
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(t.text.empty() ? ' ' : t.text[0]))) {
      // Class.allInstances()->isUnique(attr)
      std::string cls = t.text;
      ++pos_;
      expect(".");
      Token call = take();
      if (call.text != "allInstances")
        throw ParseError("expected 'allInstances' after class name", call.line, call.col);
      expect("(");
      expect(")");
      expect("->");
      Token uniq = take();
      if (uniq.text != "isUnique")
        throw ParseError("expected 'isUnique' after allInstances()", uniq.line, uniq.col);
      expect("(");
      Token attr = take();
      expect(")");
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::IsUnique;
      e->name = cls;
      e->extra = attr.text;
      return e;
    }
    throw ParseError("unexpected token '" + t.text + "' in expression", t.line, t.col);
  }

  std::vector<Token> tokens_;
  Token eof_{"<eof>", 1, 1};
  size_t pos_ = 0;
};

}  // namespace ocl

// ---------------------------------------------------------------------------
// Constraints and sets
// ---------------------------------------------------------------------------

struct Constraint {
  std::string name;
  ConstraintKind kind = ConstraintKind::Value;
  std::string context;  // class name
  std::optional<std::string> operationContext;
  ocl::ExprPtr expr;
  int line = 0;  // declaration line in the source file
};

struct ConstraintSet {
  std::vector<Constraint> constraints;
  bool empty() const { return constraints.empty(); }
  size_t size() const { return constraints.size(); }
};

// ---------------------------------------------------------------------------
// Parsing `.ocl` files
// ---------------------------------------------------------------------------

// Blocks:
//   context C inv name: expr
//   context C::op() pre name: expr
//   context C::op() post name: expr
// An expression may continue over following lines up to the next `context`.
inline ConstraintSet parse_constraints(const std::string& text) {
  ConstraintSet set;

  struct Block {
    std::string header;
    std::string expr;
    int line = 0;
  };
  std::vector<Block> blocks;
  {
    std::istringstream in(text);
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
      ++number;
      std::string t = raw;
      size_t comment = t.find("--");
      if (comment != std::string::npos) t = t.substr(0, comment);
      size_t b = t.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      size_t e = t.find_last_not_of(" \t\r");
      t = t.substr(b, e - b + 1);
      if (t.rfind("context", 0) == 0) {
        blocks.push_back({t, "", number});
      } else {
        if (blocks.empty())
          throw ParseError("expression outside any 'context' block", number,
                           static_cast<int>(b) + 1);
        blocks.back().expr += " " + t;
      }
    }
  }

  for (auto& block : blocks) {
    // Split the header at the first ':' that is not part of '::'.
    size_t colon = std::string::npos;
    for (size_t i = 0; i < block.header.size(); ++i) {
      if (block.header[i] != ':') continue;
      if (i + 1 < block.header.size() && block.header[i + 1] == ':') { ++i; continue; }
      if (i > 0 && block.header[i - 1] == ':') continue;
      colon = i;
      break;
    }
    if (colon == std::string::npos)
      throw ParseError("constraint header needs ': expression'", block.line, 1);
    std::string head = block.header.substr(0, colon);
    std::string exprText = block.header.substr(colon + 1) + block.expr;

    std::istringstream hs(head);
    std::string kw, ctx, stereo, cname;
    hs >> kw >> ctx >> stereo >> cname;
    if (kw != "context" || ctx.empty() || stereo.empty() || cname.empty())
      throw ParseError("malformed constraint header '" + head + "'", block.line, 1);

    Constraint c;
    c.line = block.line;
    c.name = cname;
    auto sep = ctx.find("::");
    if (sep != std::string::npos) {
      c.context = normalize_identifier(ctx.substr(0, sep));
      std::string op = ctx.substr(sep + 2);
      auto paren = op.find('(');
      if (paren != std::string::npos) op = op.substr(0, paren);
      c.operationContext = op;
    } else {
      c.context = normalize_identifier(ctx);
    }

    bool isPre = stereo == "pre", isPost = stereo == "post", isInv = stereo == "inv";
    if (!isPre && !isPost && !isInv)
      throw ParseError("expected 'inv', 'pre' or 'post', got '" + stereo + "'",
                       block.line, 1);
    if ((isPre || isPost) && !c.operationContext)
      throw ParseError("pre/post constraint needs 'Class::operation()' context",
                       block.line, 1);
    if (isInv && c.operationContext)
      throw ParseError("invariant must not name an operation context", block.line, 1);

    c.expr = ocl::ExprParser(ocl::lex(exprText, block.line)).parse();

    // Kind classification from syntax; mismatches are errors.
    bool hasUnique = false, hasSize = false, hasPreNav = false;
    ocl::visit(c.expr, [&](const ocl::Expr& e) {
      if (e.kind == ocl::Expr::Kind::IsUnique) hasUnique = true;
      if (e.kind == ocl::Expr::Kind::SizeOf) hasSize = true;
      if (e.kind == ocl::Expr::Kind::Navigation && e.atPre) hasPreNav = true;
    });
    if (hasPreNav && !isPost)
      throw ParseError("'@pre' navigation outside a post-condition in '" + c.name + "'",
                       block.line, 1);
    if (isPre) {
      c.kind = ConstraintKind::Precondition;
    } else if (isPost) {
      c.kind = ConstraintKind::Postcondition;
    } else if (hasUnique) {
      c.kind = ConstraintKind::Uniqueness;
    } else if (hasSize) {
      c.kind = ConstraintKind::Cardinality;
    } else {
      c.kind = ConstraintKind::Value;
    }
    if (hasUnique && c.kind != ConstraintKind::Uniqueness)
      throw ParseError("isUnique() only allowed in a Uniqueness invariant ('" + c.name + "')",
                       block.line, 1);
    if (hasSize && c.kind != ConstraintKind::Cardinality)
      throw ParseError("size() bound only allowed in a Cardinality invariant ('" + c.name + "')",
                       block.line, 1);
    set.constraints.push_back(std::move(c));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Snapshots
// ---------------------------------------------------------------------------

struct ObjectLink {
  std::string relation;  // relationship label
  std::string peerId;
};

struct ObjectInstance {
  std::string className;
  std::string instanceId;
  std::map<std::string, Value> attributes;
  std::string currentState;
  std::vector<ObjectLink> links;
};

struct ObjectSnapshot {
  std::vector<ObjectInstance> instances;

  const ObjectInstance* find(const std::string& id) const {
    for (const auto& i : instances)
      if (i.instanceId == id) return &i;
    return nullptr;
  }
  std::vector<const ObjectInstance*> of_class(const std::string& cls) const {
    std::vector<const ObjectInstance*> out;
    for (const auto& i : instances)
      if (i.className == cls) out.push_back(&i);
    return out;
  }
};

struct TransitionRecord {
  std::string instanceId;
  std::string operation;
  ObjectSnapshot preSnapshot;
  ObjectSnapshot postSnapshot;
};

// ---------------------------------------------------------------------------
// Binding
// ---------------------------------------------------------------------------

struct BoundConstraints {
  std::vector<Constraint> constraints;
  // class -> state -> parent composite ("" when top level)
  std::map<std::string, std::map<std::string, std::string>> stateParents;
  std::uint64_t modelChecksum = 0;

  std::vector<const Constraint*> of_kind(ConstraintKind k) const {
    std::vector<const Constraint*> out;
    for (const auto& c : constraints)
      if (c.kind == k) out.push_back(&c);
    return out;
  }
};

class BindError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline BoundConstraints bind(const ConstraintSet& set, const SystemModel& model) {
  BoundConstraints bound;
  std::vector<std::string> errors;

  for (const auto& c : set.constraints) {
    const AgentClass* cls = model.find_class(c.context);
    if (!cls) {
      errors.push_back(c.name + ": unknown class '" + c.context + "'");
      continue;
    }
    if (c.operationContext && !cls->find_method(*c.operationContext))
      errors.push_back(c.name + ": class '" + c.context + "' has no operation '" +
                       *c.operationContext + "'");

    auto relationship_label_exists = [&](const std::string& label) {
      for (const auto& r : model.relationships)
        if (r.label == label && (r.source == c.context || r.target == c.context))
          return true;
      return false;
    };

    ocl::visit(c.expr, [&](const ocl::Expr& e) {
      switch (e.kind) {
        case ocl::Expr::Kind::Navigation:
          if (!cls->find_attribute(e.name))
            errors.push_back(c.name + ": class '" + c.context + "' has no attribute '" +
                             e.name + "'");
          break;
        case ocl::Expr::Kind::SizeOf:
          if (!relationship_label_exists(e.name))
            errors.push_back(c.name + ": no relationship labeled '" + e.name +
                             "' involves class '" + c.context + "'");
          break;
        case ocl::Expr::Kind::InState: {
          const StateMachine* m = model.machine_for(c.context);
          if (!m)
            errors.push_back(c.name + ": class '" + c.context + "' has no state machine");
          else if (!m->find_state(e.name))
            errors.push_back(c.name + ": unknown state '" + e.name + "' in machine of '" +
                             c.context + "'");
          break;
        }
        case ocl::Expr::Kind::IsUnique: {
          const AgentClass* target = model.find_class(e.name);
          if (!target)
            errors.push_back(c.name + ": unknown class '" + e.name + "'");
          else if (!target->find_attribute(e.extra))
            errors.push_back(c.name + ": class '" + e.name + "' has no attribute '" +
                             e.extra + "'");
          break;
        }
        default:
          break;
      }
    });
    bound.constraints.push_back(c);
  }

  if (!errors.empty()) {
    std::string msg = "constraint binding failed:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw BindError(msg);
  }

  for (const auto& m : model.stateMachines) {
    auto& parents = bound.stateParents[m.ownerClass];
    for (const auto& s : m.states) parents[s.name] = s.parent.value_or("");
  }
  {
    std::string sig = model.modelName + "/" + model.version;
    for (const auto& c : model.classes) sig += "|" + c.name;
    bound.modelChecksum = fnv1a(sig);
  }
  return bound;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct Violation {
  std::string constraintName;
  std::string instanceId;  // comma-joined when several instances participate
  std::string renderedExpr;
  std::string actualValues;
  std::string reason;  // "violated" or "undefined"
};

namespace ocl {

enum class Tri { True, False, Undefined };

struct EvalContext {
  const ObjectInstance* self = nullptr;
  const ObjectInstance* selfPre = nullptr;  // @pre navigation target
  const BoundConstraints* bound = nullptr;
  std::string contextClass;
};

inline bool numeric(const Value& v) {
  return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v);
}
inline double as_double(const Value& v) {
  if (std::holds_alternative<std::int64_t>(v))
    return static_cast<double>(std::get<std::int64_t>(v));
  return std::get<double>(v);
}

inline Tri compare_values(CompareOp op, const Value& a, const Value& b) {
  if (is_unset(a) || is_unset(b)) return Tri::Undefined;
  if (numeric(a) && numeric(b)) {
    constexpr double kTol = 1e-9;
    bool exact = std::holds_alternative<std::int64_t>(a) &&
                 std::holds_alternative<std::int64_t>(b);
    double x = as_double(a), y = as_double(b);
    bool eq = exact ? (x == y) : std::fabs(x - y) <= kTol;
    switch (op) {
      case CompareOp::Eq: return eq ? Tri::True : Tri::False;
      case CompareOp::Ne: return eq ? Tri::False : Tri::True;
      case CompareOp::Lt: return (!eq && x < y) ? Tri::True : Tri::False;
      case CompareOp::Le: return (eq || x < y) ? Tri::True : Tri::False;
      case CompareOp::Gt: return (!eq && x > y) ? Tri::True : Tri::False;
      case CompareOp::Ge: return (eq || x > y) ? Tri::True : Tri::False;
    }
  }
  // strings / bools: equality only meaningful comparisons
  std::string x = value_to_string(a), y = value_to_string(b);
  switch (op) {
    case CompareOp::Eq: return x == y ? Tri::True : Tri::False;
    case CompareOp::Ne: return x != y ? Tri::True : Tri::False;
    case CompareOp::Lt: return x < y ? Tri::True : Tri::False;
    case CompareOp::Le: return x <= y ? Tri::True : Tri::False;
    case CompareOp::Gt: return x > y ? Tri::True : Tri::False;
    case CompareOp::Ge: return x >= y ? Tri::True : Tri::False;
  }
  return Tri::Undefined;
}

inline Value eval_value(const ExprPtr& e, const EvalContext& ctx) {
  switch (e->kind) {
    case Expr::Kind::Literal:
      return e->literal;
    case Expr::Kind::Navigation: {
      const ObjectInstance* inst = e->atPre ? ctx.selfPre : ctx.self;
      if (!inst) return {};
      auto it = inst->attributes.find(e->name);
      if (it == inst->attributes.end()) return {};
      return it->second;
    }
    case Expr::Kind::SizeOf: {
      if (!ctx.self) return {};
      std::int64_t n = 0;
      for (const auto& l : ctx.self->links)
        if (l.relation == e->name) ++n;
      return n;
    }
    default:
      return {};
  }
}

inline Tri eval(const ExprPtr& e, const EvalContext& ctx) {
  switch (e->kind) {
    case Expr::Kind::Literal:
      if (std::holds_alternative<bool>(e->literal))
        return std::get<bool>(e->literal) ? Tri::True : Tri::False;
      return Tri::Undefined;
    case Expr::Kind::Compare:
      return compare_values(e->cmp, eval_value(e->lhs, ctx), eval_value(e->rhs, ctx));
    case Expr::Kind::Logical: {
      Tri a = eval(e->lhs, ctx);
      Tri b = eval(e->rhs, ctx);
      switch (e->logic) {
        case BoolOp::And:
          if (a == Tri::False || b == Tri::False) return Tri::False;
          if (a == Tri::Undefined || b == Tri::Undefined) return Tri::Undefined;
          return Tri::True;
        case BoolOp::Or:
          if (a == Tri::True || b == Tri::True) return Tri::True;
          if (a == Tri::Undefined || b == Tri::Undefined) return Tri::Undefined;
          return Tri::False;
        case BoolOp::Implies:
          if (a == Tri::False) return Tri::True;
          if (a == Tri::Undefined) return Tri::Undefined;
          return b;
      }
      return Tri::Undefined;
    }
    case Expr::Kind::Not: {
      Tri v = eval(e->operand, ctx);
      if (v == Tri::True) return Tri::False;
      if (v == Tri::False) return Tri::True;
      return Tri::Undefined;
    }
    case Expr::Kind::Navigation: {
      Value v = eval_value(e, ctx);
      if (is_unset(v)) return Tri::Undefined;
      if (std::holds_alternative<bool>(v))
        return std::get<bool>(v) ? Tri::True : Tri::False;
      return Tri::Undefined;
    }
    case Expr::Kind::InState: {
      if (!ctx.self) return Tri::Undefined;
      const std::string& cur = ctx.self->currentState;
      if (cur.empty()) return Tri::Undefined;
      if (cur == e->name) return Tri::True;
      // composite match: current leaf's parent equals the asked state
      auto clsIt = ctx.bound->stateParents.find(ctx.self->className);
      if (clsIt != ctx.bound->stateParents.end()) {
        auto stIt = clsIt->second.find(cur);
        if (stIt != clsIt->second.end() && stIt->second == e->name) return Tri::True;
      }
      return Tri::False;
    }
    case Expr::Kind::IsUnique:
    case Expr::Kind::SizeOf:
      return Tri::Undefined;  // handled structurally by the checkers
  }
  return Tri::Undefined;
}

inline std::string actual_values(const ExprPtr& e, const EvalContext& ctx) {
  std::vector<std::string> parts;
  visit(e, [&](const Expr& node) {
    if (node.kind == Expr::Kind::Navigation) {
      const ObjectInstance* inst = node.atPre ? ctx.selfPre : ctx.self;
      Value v;
      if (inst) {
        auto it = inst->attributes.find(node.name);
        if (it != inst->attributes.end()) v = it->second;
      }
      parts.push_back(node.name + (node.atPre ? "@pre" : "") + "=" + value_to_string(v));
    }
    if (node.kind == Expr::Kind::SizeOf && ctx.self) {
      std::int64_t n = 0;
      for (const auto& l : ctx.self->links)
        if (l.relation == node.name) ++n;
      parts.push_back(node.name + "->size()=" + std::to_string(n));
    }
    if (node.kind == Expr::Kind::InState && ctx.self)
      parts.push_back("state=" + ctx.self->currentState);
  });
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
  return out;
}

}  // namespace ocl

// Uniqueness / Cardinality / Value constraints over a snapshot.
// Pre/postconditions are transition-scoped and ignored here.
inline std::vector<Violation> check_snapshot(const BoundConstraints& bound,
                                             const ObjectSnapshot& snap) {
  std::vector<Violation> violations;

  for (const auto& c : bound.constraints) {
    switch (c.kind) {
      case ConstraintKind::Uniqueness: {
        // expr is Class.allInstances()->isUnique(attr), possibly the whole tree
        const ocl::Expr* uniq = nullptr;
        ocl::visit(c.expr, [&](const ocl::Expr& e) {
          if (e.kind == ocl::Expr::Kind::IsUnique) uniq = &e;
        });
        if (!uniq) break;
        std::map<std::string, std::vector<std::string>> byValue;
        for (const ObjectInstance* inst : snap.of_class(uniq->name)) {
          auto it = inst->attributes.find(uniq->extra);
          std::string key = it == inst->attributes.end() ? "<unset>"
                                                         : value_to_string(it->second);
          byValue[key].push_back(inst->instanceId);
        }
        for (const auto& [value, ids] : byValue) {
          if (ids.size() < 2) continue;
          Violation v;
          v.constraintName = c.name;
          std::string joined;
          for (size_t i = 0; i < ids.size(); ++i) joined += (i ? "," : "") + ids[i];
          v.instanceId = joined;
          v.renderedExpr = ocl::render(c.expr);
          v.actualValues = uniq->extra + "=" + value;
          v.reason = "violated";
          violations.push_back(v);
        }
        break;
      }
      case ConstraintKind::Cardinality: {
        for (const ObjectInstance* inst : snap.of_class(c.context)) {
          ocl::EvalContext ctx{inst, nullptr, &bound, c.context};
          ocl::Tri result = ocl::eval(c.expr, ctx);
          if (result == ocl::Tri::True) continue;
          violations.push_back({c.name, inst->instanceId, ocl::render(c.expr),
                                ocl::actual_values(c.expr, ctx),
                                result == ocl::Tri::Undefined ? "undefined" : "violated"});
        }
        break;
      }
      case ConstraintKind::Value: {
        for (const ObjectInstance* inst : snap.of_class(c.context)) {
          ocl::EvalContext ctx{inst, nullptr, &bound, c.context};
          ocl::Tri result = ocl::eval(c.expr, ctx);
          if (result == ocl::Tri::True) continue;
          violations.push_back({c.name, inst->instanceId, ocl::render(c.expr),
                                ocl::actual_values(c.expr, ctx),
                                result == ocl::Tri::Undefined ? "undefined" : "violated"});
        }
        break;
      }
      case ConstraintKind::Precondition:
      case ConstraintKind::Postcondition:
        break;
    }
  }
  return violations;
}

// Pre/postconditions around one operation call.
inline std::vector<Violation> check_transition(const BoundConstraints& bound,
                                               const TransitionRecord& rec) {
  std::vector<Violation> violations;
  const ObjectInstance* pre = rec.preSnapshot.find(rec.instanceId);
  const ObjectInstance* post = rec.postSnapshot.find(rec.instanceId);
  if (!pre || !post)
    throw std::invalid_argument("transition record snapshots must contain instance '" +
                                rec.instanceId + "'");

  for (const auto& c : bound.constraints) {
    if (c.kind != ConstraintKind::Precondition && c.kind != ConstraintKind::Postcondition)
      continue;
    if (c.context != pre->className) continue;
    if (!c.operationContext || *c.operationContext != rec.operation) continue;

    bool isPre = c.kind == ConstraintKind::Precondition;
    ocl::EvalContext ctx;
    ctx.self = isPre ? pre : post;
    ctx.selfPre = pre;
    ctx.bound = &bound;
    ctx.contextClass = c.context;
    ocl::Tri result = ocl::eval(c.expr, ctx);
    if (result == ocl::Tri::True) continue;
    violations.push_back({c.name, rec.instanceId, ocl::render(c.expr),
                          ocl::actual_values(c.expr, ctx),
                          result == ocl::Tri::Undefined ? "undefined" : "violated"});
  }
  return violations;
}

}  // namespace amdd
