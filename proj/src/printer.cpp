#include <cctype>

#include "mql/syntax.hpp"

namespace mql {

namespace {

bool bare_identifier_ok(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  }
  return !is_reserved_word(s);
}

std::string quote_string(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

// Labels come from identifiers, numbers or strings; print them in a form
// that lexes back to the same text.
std::string label_text(std::string_view s) {
  if (bare_identifier_ok(s)) return std::string(s);
  auto toks = [&] {
    try {
      return tokenize(s);
    } catch (...) {
      return std::vector<Token>{};
    }
  }();
  if (toks.size() == 1 && toks[0].kind == TokenKind::Number && toks[0].text == s) {
    return std::string(s);
  }
  return quote_string(s);
}

std::string join_identifiers(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += quote_identifier(names[i]);
  }
  return out;
}

std::string join_labels(const std::vector<std::string>& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ", ";
    out += label_text(labels[i]);
  }
  return out;
}

std::string features_text(const FeatureList& f) {
  return f.star ? "*" : join_identifiers(f.names);
}

std::string int_operand(const IntExpr& e) {
  return e.kind == IntExpr::Kind::Binary ? "(" + to_text(e) + ")" : to_text(e);
}

std::string num_operand(const NumExpr& e) {
  return e.kind == NumExpr::Kind::Binary || e.kind == NumExpr::Kind::Negate ? "(" + to_text(e) + ")"
                                                                            : to_text(e);
}

std::string task_text(const TaskHead& task, const std::optional<std::string>& over) {
  std::string out;
  if (auto p = std::get_if<PredictionHead>(&task)) {
    out = "PREDICTION " + quote_identifier(p->target);
  } else if (auto c = std::get_if<ClassificationHead>(&task)) {
    out = "CLASSIFICATION INTO " + join_labels(c->labels);
  } else {
    out = "CLUSTER OF " + to_text(std::get<ClusterHead>(task).k);
  }
  if (over) out += " OVER " + quote_identifier(*over);
  return out;
}

}  // namespace

std::string quote_identifier(std::string_view name) {
  if (bare_identifier_ok(name)) return std::string(name);
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string to_text(const IntExpr& e) {
  switch (e.kind) {
    case IntExpr::Kind::Literal: return std::to_string(e.value);
    case IntExpr::Kind::CountStar: return "COUNT(*)";
    case IntExpr::Kind::Binary:
      return int_operand(e.operands[0]) + " " + e.op + " " + int_operand(e.operands[1]);
  }
  return {};
}

std::string to_text(const NumExpr& e) {
  switch (e.kind) {
    case NumExpr::Kind::Number: return format_number(e.number);
    case NumExpr::Kind::ColumnRef: return quote_identifier(e.name);
    case NumExpr::Kind::Negate: return "-" + num_operand(e.operands[0]);
    case NumExpr::Kind::Binary:
      return num_operand(e.operands[0]) + " " + e.op + " " + num_operand(e.operands[1]);
    case NumExpr::Kind::Call: return e.name + "(" + to_text(e.operands[0]) + ")";
  }
  return {};
}

std::string to_text(const Predicate& p) {
  std::string out;
  for (std::size_t i = 0; i < p.terms.size(); ++i) {
    const auto& t = p.terms[i];
    if (i) out += " AND ";
    out += quote_identifier(t.column) + " " + std::string(compare_op_text(t.op)) + " ";
    if (auto d = std::get_if<double>(&t.value)) {
      out += format_number(*d);
    } else {
      out += quote_string(std::get<std::string>(t.value));
    }
  }
  return out;
}

std::string pretty_print(const Statement& s) {
  std::vector<std::string> lines;
  if (auto g = std::get_if<GenerateStmt>(&s.body)) {
    lines.push_back(g->display ? "GENERATE DISPLAY OF" : "GENERATE");
    lines.push_back(task_text(g->task, g->over));
    if (auto m = std::get_if<StoredModelRef>(&g->model)) {
      lines.push_back("USING MODEL " + quote_identifier(m->name));
    } else if (auto a = std::get_if<AlgorithmRef>(&g->model)) {
      lines.push_back("USING ALGORITHM " + quote_identifier(a->name));
    }
    if (g->accuracy) lines.push_back("WITH MODEL ACCURACY " + format_number(*g->accuracy));
    if (!g->labels.empty()) lines.push_back("LABEL " + join_identifiers(g->labels));
    if (g->features) lines.push_back("FEATURES " + features_text(*g->features));
    if (!g->from.empty()) lines.push_back("FROM " + join_identifiers(g->from));
    if (!g->where.empty()) lines.push_back("WHERE " + to_text(g->where));
  } else if (auto c = std::get_if<ConstructStmt>(&s.body)) {
    std::string head = "CONSTRUCT " + quote_identifier(c->model_name);
    if (c->supervision) {
      head += *c->supervision == Supervision::Supervised ? " AS SUPERVISED" : " AS UNSUPERVISED";
    }
    lines.push_back(head);
    lines.push_back("FOR " + task_text(c->task, std::nullopt));
    if (c->algorithm) lines.push_back("USING " + quote_identifier(*c->algorithm));
    if (c->accuracy) lines.push_back("WITH MODEL ACCURACY " + format_number(*c->accuracy));
    lines.push_back("TRAIN ON " + to_text(c->train_n) + " TEST ON " + to_text(c->test_m));
    lines.push_back("FEATURES " + features_text(c->features));
    lines.push_back("FROM " + join_identifiers(c->from));
    if (!c->where.empty()) lines.push_back("WHERE " + to_text(c->where));
  } else {
    const auto& in = std::get<InspectStmt>(s.body);
    for (std::size_t i = 0; i < in.actions.size(); ++i) {
      const auto& a = in.actions[i];
      std::string item = (i == 0 ? "INSPECT " : "") + quote_identifier(a.column) + " ";
      if (auto cat = std::get_if<Categorize>(&a.action)) {
        item += "CATEGORIZE INTO " + join_labels(cat->labels);
      } else if (std::holds_alternative<Impute>(a.action)) {
        item += "IMPUTE";
      } else if (auto num = std::get_if<Numerize>(&a.action)) {
        item += "NUMERIZE AS " + to_text(num->expr);
      } else {
        item += "DEDUPLICATE";
      }
      if (i + 1 < in.actions.size()) item += ",";
      lines.push_back(std::move(item));
    }
    lines.push_back("FROM " + join_identifiers(in.from));
    if (!in.where.empty()) lines.push_back("WHERE " + to_text(in.where));
  }

  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += "\n";
    out += lines[i];
  }
  return out;
}

std::string pretty_print(const Program& p) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += "\n\n";
    out += pretty_print(p[i]) + ";";
  }
  if (!p.empty()) out += "\n";
  return out;
}

}  // namespace mql
