#include "masksearch/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <vector>

#include "masksearch/error.hpp"

namespace masksearch {

namespace {

enum class Tok { ident, number, punct, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;  // identifier / punctuation / number literal
  std::size_t line = 1;
  std::size_t col = 1;
};

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
  return out;
}

std::vector<Token> lex(std::string_view src, std::size_t base_line = 1, std::size_t base_col = 1,
                       bool fixed_position = false) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t i = 0;
  auto here = [&](Token t) {
    if (fixed_position) {
      t.line = base_line;
      t.col = base_col;
    } else {
      t.line = line;
      t.col = col;
    }
    return t;
  };
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const unsigned char c = static_cast<unsigned char>(src[i]);
    if (std::isspace(c)) {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {  // line comment
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isalpha(c) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back(here({Tok::ident, std::string(src.substr(i, j - i))}));
      advance(j - i);
      continue;
    }
    const bool dot_digit = c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1]));
    if (std::isdigit(c) || dot_digit) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.' && !(j + 1 < src.size() && src[j + 1] == '.')) {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      out.push_back(here({Tok::number, std::string(src.substr(i, j - i))}));
      advance(j - i);
      continue;
    }
    if (src.substr(i, 3) == "...") {
      out.push_back(here({Tok::punct, "..."}));
      advance(3);
      continue;
    }
    for (std::string_view two : {"<=", ">=", "<>", "!="}) {
      if (src.substr(i, 2) == two) {
        out.push_back(here({Tok::punct, std::string(two)}));
        advance(2);
        goto next;
      }
    }
    if (std::string_view("(),;+-*/<>=").find(static_cast<char>(c)) != std::string_view::npos) {
      out.push_back(here({Tok::punct, std::string(1, static_cast<char>(c))}));
      advance(1);
      continue;
    }
    {
      const std::size_t l = fixed_position ? base_line : line;
      const std::size_t cc = fixed_position ? base_col : col;
      std::string shown = std::isprint(c) ? std::string(1, static_cast<char>(c)) : "byte " + std::to_string(c);
      throw ParseError(l, cc, "unexpected character '" + shown + "'");
    }
  next:;
  }
  Token end{Tok::end, "", line, col};
  if (fixed_position) {
    end.line = base_line;
    end.col = base_col;
  }
  out.push_back(end);
  return out;
}

std::vector<Token> substitute(const std::vector<Token>& tokens, const Bindings& bindings) {
  if (bindings.empty()) return tokens;
  std::vector<Token> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    const auto it = t.kind == Tok::ident ? bindings.find(t.text) : bindings.end();
    if (it == bindings.end()) {
      out.push_back(t);
      continue;
    }
    std::vector<Token> repl;
    try {
      repl = lex(it->second, t.line, t.col, true);
    } catch (const ParseError& e) {
      throw ParseError(t.line, t.col, "in binding for '" + t.text + "': " + e.message());
    }
    repl.pop_back();  // end marker
    out.insert(out.end(), repl.begin(), repl.end());
    const bool call_like = it->second.find('(') != std::string::npos;
    if (call_like && i + 3 < tokens.size() && tokens[i + 1].text == "(" && tokens[i + 2].kind == Tok::ident &&
        upper(tokens[i + 2].text) == "MASK" && tokens[i + 3].text == ")") {
      i += 3;
    }
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {
    for (const Token& t : toks_) {
      if (t.kind == Tok::ident && upper(t.text) == "GROUP") grouped_ = true;
    }
  }

  QueryPlan parse_query() {
    QueryPlan plan;
    plan.group_by_image = grouped_;
    expect_kw("SELECT");
    const Token& key = expect_ident("mask_id or image_id");
    const std::string k = upper(key.text);
    if (k == "MASK_ID") {
      plan.select = SelectKey::mask_id;
    } else if (k == "IMAGE_ID") {
      plan.select = SelectKey::image_id;
    } else {
      fail(key, "expected mask_id or image_id after SELECT");
    }
    if (grouped_ && plan.select != SelectKey::image_id) fail(key, "grouped queries must SELECT image_id");
    if (!grouped_ && plan.select != SelectKey::mask_id) fail(key, "SELECT image_id requires GROUP BY image_id");

    if (accept_punct(",")) {
      plan.metric = parse_expr(false);
      expect_kw("AS");
      const Token& alias = expect_ident("alias");
      if (is_reserved(alias.text)) fail(alias, "alias '" + alias.text + "' is a reserved word");
      plan.metric_alias = alias.text;
      alias_ = alias.text;
      alias_expr_ = plan.metric;
    }

    expect_kw("FROM");
    const Token& table = expect_ident("MasksDatabaseView");
    if (upper(table.text) != "MASKSDATABASEVIEW") fail(table, "unknown table '" + table.text + "'");

    if (accept_kw("WHERE")) {
      do {
        parse_condition(plan);
      } while (accept_kw("AND"));
    }
    if (accept_kw("GROUP")) {
      expect_kw("BY");
      const Token& g = expect_ident("image_id");
      if (upper(g.text) != "IMAGE_ID") fail(g, "only GROUP BY image_id is supported");
    }
    if (accept_kw("HAVING")) {
      const Token& at = peek();
      if (!grouped_) fail(at, "HAVING requires GROUP BY image_id");
      plan.predicate = parse_predicate();
    }
    if (accept_kw("ORDER")) {
      expect_kw("BY");
      Order order;
      order.expr = parse_expr(false);
      if (accept_kw("DESC")) {
        order.descending = true;
      } else {
        accept_kw("ASC");
      }
      plan.order = order;
    }
    if (accept_kw("LIMIT")) {
      const Token& t = peek();
      const std::int64_t k_val = parse_int();
      if (k_val <= 0) fail(t, "LIMIT must be a positive integer");
      plan.limit = k_val;
    }
    accept_punct(";");
    if (peek().kind != Tok::end) fail(peek(), "unexpected '" + peek().text + "' after end of statement");

    const Token& last = toks_.back();
    if (grouped_) {
      plan.kind = QueryKind::aggregation;
      if (plan.limit && !plan.order) fail(last, "LIMIT requires ORDER BY");
      if (!plan.order && !plan.predicate) fail(last, "grouped query needs ORDER BY or HAVING");
    } else if (plan.order) {
      plan.kind = QueryKind::topk;
      if (!plan.limit) fail(last, "ORDER BY requires LIMIT outside grouped queries");
      if (plan.predicate) fail(last, "a query cannot both filter on CP and ORDER BY; use two statements");
    } else {
      plan.kind = QueryKind::filter;
      if (plan.limit) fail(last, "LIMIT requires ORDER BY");
    }
    return plan;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  bool grouped_ = false;
  std::string alias_;
  ExprPtr alias_expr_;

  [[noreturn]] static void fail(const Token& t, const std::string& msg) { throw ParseError(t.line, t.col, msg); }

  static bool is_reserved(const std::string& s) {
    static const char* const kWords[] = {"SELECT", "FROM", "WHERE", "AND", "GROUP", "BY", "HAVING", "ORDER",
                                         "LIMIT", "ASC", "DESC", "AS", "IN", "CP", "AREA", "MASK",
                                         "INTERSECT", "UNION", "SUM", "AVG", "MEAN", "MIN", "MAX",
                                         "FULL_IMG", "OBJECT", "MASK_ID", "IMAGE_ID", "MODEL_ID", "MASK_TYPE"};
    const std::string u = upper(s);
    return std::any_of(std::begin(kWords), std::end(kWords), [&](const char* w) { return u == w; });
  }

  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& take() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }

  bool is_kw(const Token& t, std::string_view kw) const { return t.kind == Tok::ident && upper(t.text) == kw; }
  bool accept_kw(std::string_view kw) {
    if (!is_kw(peek(), kw)) return false;
    take();
    return true;
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail(peek(), "expected " + std::string(kw) + describe_found());
  }
  bool accept_punct(std::string_view p) {
    if (peek().kind != Tok::punct || peek().text != p) return false;
    take();
    return true;
  }
  void expect_punct(std::string_view p) {
    if (!accept_punct(p)) fail(peek(), "expected '" + std::string(p) + "'" + describe_found());
  }
  const Token& expect_ident(const std::string& what) {
    if (peek().kind != Tok::ident) fail(peek(), "expected " + what + describe_found());
    return take();
  }
  std::string describe_found() const {
    return peek().kind == Tok::end ? " but reached end of input" : " but found '" + peek().text + "'";
  }

  double parse_number() {
    bool negative = false;
    while (peek().kind == Tok::punct && (peek().text == "-" || peek().text == "+")) {
      if (take().text == "-") negative = !negative;
    }
    const Token& t = peek();
    if (t.kind == Tok::ident) fail(t, "unbound parameter '" + t.text + "' (expected a number)");
    if (t.kind != Tok::number) fail(t, "expected a number" + describe_found());
    take();
    double v = 0;
    const auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size() || !std::isfinite(v)) {
      fail(t, "invalid number '" + t.text + "'");
    }
    return negative ? -v : v;
  }

  std::int64_t parse_int() {
    const Token& t = peek();
    const double v = parse_number();
    if (v != std::floor(v) || std::fabs(v) > 9.0e15) fail(t, "expected an integer");
    return static_cast<std::int64_t>(v);
  }

  int parse_coord() {
    const Token& t = peek();
    const std::int64_t v = parse_int();
    if (v < 0 || v > std::numeric_limits<int>::max()) fail(t, "roi coordinate out of range");
    return static_cast<int>(v);
  }

  void parse_condition(QueryPlan& plan) {
    const Token& t = peek();
    if (is_kw(t, "MODEL_ID")) {
      take();
      expect_punct("=");
      plan.model_id = parse_int();
      return;
    }
    if (is_kw(t, "MASK_TYPE")) {
      take();
      if (accept_punct("=")) {
        plan.mask_types.push_back(parse_int());
      } else {
        expect_kw("IN");
        parse_int_list(plan.mask_types);
      }
      std::sort(plan.mask_types.begin(), plan.mask_types.end());
      plan.mask_types.erase(std::unique(plan.mask_types.begin(), plan.mask_types.end()), plan.mask_types.end());
      return;
    }
    if (grouped_) fail(t, "CP predicates on groups go in HAVING, not WHERE");
    if (plan.predicate) fail(t, "only one CP predicate is supported");
    plan.predicate = parse_predicate();
  }

  void parse_int_list(std::vector<std::int64_t>& out) {
    expect_punct("(");
    std::vector<std::int64_t> values;
    bool pending_ellipsis = false;
    for (;;) {
      if (accept_punct("...")) {
        if (values.empty() || pending_ellipsis) fail(peek(), "'...' must follow a value");
        pending_ellipsis = true;
      } else {
        const Token& t = peek();
        const std::int64_t v = parse_int();
        if (pending_ellipsis) {
          if (v - values.back() > 100000) fail(t, "range after '...' too large");
          for (std::int64_t x = values.back() + 1; x < v; ++x) values.push_back(x);
          pending_ellipsis = false;
        }
        values.push_back(v);
      }
      if (accept_punct(")")) break;
      expect_punct(",");
    }
    if (pending_ellipsis) fail(peek(), "'...' must be followed by a value");
    out.insert(out.end(), values.begin(), values.end());
  }

  Predicate parse_predicate() {
    Predicate p;
    p.expr = parse_expr(false);
    const Token& op = peek();
    if (op.kind != Tok::punct) fail(op, "expected comparator <, <=, > or >=" + describe_found());
    if (op.text == "<") {
      p.cmp = Comparator::lt;
    } else if (op.text == "<=") {
      p.cmp = Comparator::le;
    } else if (op.text == ">") {
      p.cmp = Comparator::gt;
    } else if (op.text == ">=") {
      p.cmp = Comparator::ge;
    } else if (op.text == "=" || op.text == "<>" || op.text == "!=") {
      fail(op, "equality comparisons on CP are not supported");
    } else {
      fail(op, "expected comparator <, <=, > or >=" + describe_found());
    }
    take();
    p.threshold = parse_number();
    return p;
  }

  ExprPtr parse_expr(bool in_agg) {
    ExprPtr lhs = parse_term(in_agg);
    while (peek().kind == Tok::punct && (peek().text == "+" || peek().text == "-")) {
      const char op = take().text[0];
      lhs = make_binary(op, lhs, parse_term(in_agg));
    }
    return lhs;
  }

  ExprPtr parse_term(bool in_agg) {
    ExprPtr lhs = parse_factor(in_agg);
    while (peek().kind == Tok::punct && (peek().text == "*" || peek().text == "/")) {
      const char op = take().text[0];
      lhs = make_binary(op, lhs, parse_factor(in_agg));
    }
    return lhs;
  }

  ExprPtr parse_factor(bool in_agg) {
    const Token& t = peek();
    if (t.kind == Tok::punct && t.text == "-") {
      take();
      ExprPtr inner = parse_factor(in_agg);
      if (const auto* c = std::get_if<Constant>(&inner->node)) return make_const(-c->value);
      return make_binary('*', make_const(-1), inner);
    }
    if (t.kind == Tok::number) return make_const(parse_number());
    if (t.kind == Tok::punct && t.text == "(") {
      take();
      ExprPtr e = parse_expr(in_agg);
      expect_punct(")");
      return e;
    }
    if (t.kind != Tok::ident) fail(t, "expected an expression" + describe_found());
    const std::string u = upper(t.text);
    if (u == "CP") return parse_cp(in_agg);
    if (u == "AREA") {
      take();
      expect_punct("(");
      RoiSpec roi = parse_roi();
      expect_punct(")");
      return make_area(roi);
    }
    if (u == "SUM" || u == "AVG" || u == "MEAN" || u == "MIN" || u == "MAX") {
      if (!grouped_) fail(t, u + " requires GROUP BY image_id");
      if (in_agg) fail(t, "nested scalar aggregation");
      take();
      const ScalarAgg fn = u == "SUM"   ? ScalarAgg::sum
                           : u == "MIN" ? ScalarAgg::min
                           : u == "MAX" ? ScalarAgg::max
                                        : ScalarAgg::avg;
      expect_punct("(");
      ExprPtr arg = parse_expr(true);
      expect_punct(")");
      return make_agg(fn, arg);
    }
    if (!alias_.empty() && t.text == alias_) {
      take();
      if (in_agg) fail(t, "alias cannot be used inside an aggregate");
      return alias_expr_;
    }
    if (is_reserved(t.text)) fail(t, "unexpected keyword '" + t.text + "'");
    if (peek(1).kind == Tok::punct && peek(1).text == "(") fail(t, "unknown function '" + t.text + "'");
    fail(t, "unbound parameter or unknown identifier '" + t.text + "'");
  }

  ExprPtr parse_cp(bool in_agg) {
    const Token& at = take();
    expect_punct("(");
    const MaskTarget target = parse_target();
    if (target.aggregated) {
      if (!grouped_) fail(at, "MASK_AGG (intersect/union) requires GROUP BY image_id");
      if (in_agg) fail(at, "MASK_AGG cannot appear inside a scalar aggregate");
    } else if (grouped_ && !in_agg) {
      fail(at, "CP(mask, ...) in a grouped query must be wrapped in SUM/AVG/MIN/MAX or use a MASK_AGG");
    }
    expect_punct(",");
    const RoiSpec roi = parse_roi();
    expect_punct(",");
    const Token& range_at = peek();
    expect_punct("(");
    const double lv = parse_number();
    expect_punct(",");
    const double uv = parse_number();
    expect_punct(")");
    if (!(lv < uv)) fail(range_at, "malformed range: lv must be < uv");
    if (lv < 0 || uv > 1) fail(range_at, "malformed range: values must lie in [0, 1]");
    expect_punct(")");
    return make_cp(target, roi, ValueRange(lv, uv));
  }

  MaskTarget parse_target() {
    const Token& t = peek();
    if (t.kind != Tok::ident) fail(t, "expected mask, intersect(...) or union(...)" + describe_found());
    const std::string u = upper(t.text);
    MaskTarget target;
    if (u == "MASK") {
      take();
      return target;
    }
    if (u != "INTERSECT" && u != "UNION") {
      if (peek(1).text == "(") fail(t, "unknown function '" + t.text + "'");
      fail(t, "unbound parameter or unknown mask expression '" + t.text + "'");
    }
    take();
    target.aggregated = true;
    target.op = u == "INTERSECT" ? CombineOp::intersect : CombineOp::unite;
    expect_punct("(");
    const Token& m = expect_ident("mask");
    if (upper(m.text) != "MASK") fail(m, "MASK_AGG argument must be 'mask' or 'mask > t'");
    if (accept_punct(">")) {
      const Token& tt = peek();
      const double thr = parse_number();
      if (thr < 0 || thr > 1) fail(tt, "binarization threshold must lie in [0, 1]");
      target.threshold = thr;
    }
    expect_punct(")");
    return target;
  }

  RoiSpec parse_roi() {
    const Token& t = peek();
    if (t.kind == Tok::ident) {
      const std::string u = upper(t.text);
      if (u == "FULL_IMG") {
        take();
        return RoiSpec::full();
      }
      if (u == "OBJECT") {
        take();
        return RoiSpec::object();
      }
      fail(t, "unbound parameter or unknown roi '" + t.text + "'");
    }
    expect_punct("(");
    expect_punct("(");
    Roi r;
    r.r0 = parse_coord();
    expect_punct(",");
    r.c0 = parse_coord();
    expect_punct(")");
    expect_punct(",");
    expect_punct("(");
    r.r1 = parse_coord();
    expect_punct(",");
    r.c1 = parse_coord();
    expect_punct(")");
    expect_punct(")");
    if (r.empty()) fail(t, "empty roi: need r0 < r1 and c0 < c1");
    return RoiSpec::constant(r);
  }
};

std::string fmt_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string render_roi(const RoiSpec& roi) {
  switch (roi.kind) {
    case RoiKind::full_img: return "full_img";
    case RoiKind::object: return "object";
    case RoiKind::constant: return to_string(roi.rect);
  }
  return "";
}

int precedence(const Expr& e) {
  if (const auto* b = std::get_if<BinaryOp>(&e.node)) return (b->op == '+' || b->op == '-') ? 1 : 2;
  return 3;
}

std::string render_pred(const Predicate& p, const QueryPlan& plan) {
  const bool via_alias = !plan.metric_alias.empty() && equal(p.expr, plan.metric);
  return (via_alias ? plan.metric_alias : render(*p.expr)) + " " + std::string(to_string(p.cmp)) + " " +
         fmt_number(p.threshold);
}

}  // namespace

std::string_view to_string(QueryKind kind) {
  switch (kind) {
    case QueryKind::filter: return "filter";
    case QueryKind::topk: return "topk";
    case QueryKind::aggregation: return "aggregation";
  }
  return "";
}

std::string_view to_string(Comparator cmp) {
  switch (cmp) {
    case Comparator::lt: return "<";
    case Comparator::le: return "<=";
    case Comparator::gt: return ">";
    case Comparator::ge: return ">=";
  }
  return "";
}

std::string_view to_string(ScalarAgg fn) {
  switch (fn) {
    case ScalarAgg::sum: return "SUM";
    case ScalarAgg::avg: return "AVG";
    case ScalarAgg::min: return "MIN";
    case ScalarAgg::max: return "MAX";
  }
  return "";
}

QueryPlan parse(std::string_view sql, const Bindings& bindings) {
  return Parser(substitute(lex(sql), bindings)).parse_query();
}

std::string render(const Expr& expr) {
  struct Visitor {
    std::string operator()(const Constant& c) const { return fmt_number(c.value); }
    std::string operator()(const CpCall& cp) const {
      std::string target = "mask";
      if (cp.target.aggregated) {
        target = std::string(cp.target.op == CombineOp::intersect ? "intersect" : "union") + "(mask";
        if (cp.target.threshold) target += " > " + fmt_number(*cp.target.threshold);
        target += ")";
      }
      return "CP(" + target + ", " + render_roi(cp.roi) + ", (" + fmt_number(cp.range.lv()) + ", " +
             fmt_number(cp.range.uv()) + "))";
    }
    std::string operator()(const AreaCall& a) const { return "AREA(" + render_roi(a.roi) + ")"; }
    std::string operator()(const AggCall& a) const {
      return std::string(to_string(a.fn)) + "(" + render(*a.arg) + ")";
    }
    std::string operator()(const BinaryOp& b) const {
      const int prec = (b.op == '+' || b.op == '-') ? 1 : 2;
      std::string lhs = render(*b.lhs);
      if (precedence(*b.lhs) < prec) lhs = "(" + lhs + ")";
      std::string rhs = render(*b.rhs);
      const int rp = precedence(*b.rhs);
      if (rp < prec || (rp == prec && (b.op == '-' || b.op == '/'))) rhs = "(" + rhs + ")";
      return lhs + " " + b.op + " " + rhs;
    }
  };
  return std::visit(Visitor{}, expr.node);
}

std::string render(const QueryPlan& plan) {
  std::string out = plan.select == SelectKey::mask_id ? "SELECT mask_id" : "SELECT image_id";
  if (plan.metric) out += ", " + render(*plan.metric) + " AS " + plan.metric_alias;
  out += " FROM MasksDatabaseView";
  std::vector<std::string> conds;
  if (plan.model_id) conds.push_back("model_id = " + std::to_string(*plan.model_id));
  if (!plan.mask_types.empty()) {
    std::string list;
    for (std::size_t i = 0; i < plan.mask_types.size(); ++i) {
      if (i) list += ", ";
      list += std::to_string(plan.mask_types[i]);
    }
    conds.push_back("mask_type IN (" + list + ")");
  }
  if (!plan.group_by_image && plan.predicate) conds.push_back(render_pred(*plan.predicate, plan));
  for (std::size_t i = 0; i < conds.size(); ++i) out += (i ? " AND " : " WHERE ") + conds[i];
  if (plan.group_by_image) out += " GROUP BY image_id";
  if (plan.group_by_image && plan.predicate) out += " HAVING " + render_pred(*plan.predicate, plan);
  if (plan.order) {
    const bool via_alias = !plan.metric_alias.empty() && equal(plan.order->expr, plan.metric);
    out += " ORDER BY " + (via_alias ? plan.metric_alias : render(*plan.order->expr)) +
           (plan.order->descending ? " DESC" : " ASC");
  }
  if (plan.limit) out += " LIMIT " + std::to_string(*plan.limit);
  return out;
}

}  // namespace masksearch
