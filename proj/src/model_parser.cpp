#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

#include "berthsim/model_format.hpp"

namespace berthsim {

namespace {

enum class T { ident, number, string, dist, lbrace, rbrace, assign, arrow, colon, comma };

struct Tok {
  T kind;
  std::string text;
  int col = 0;  // 1-based
};

struct SyntaxFault {
  int col;
  std::string message;
};

bool ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9') || c == '.'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Tok> lex_line(std::string_view line) {
  std::vector<Tok> out;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    int col = static_cast<int>(i) + 1;
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') break;
    if (c == '{') {
      out.push_back({T::lbrace, "{", col});
      ++i;
    } else if (c == '}') {
      out.push_back({T::rbrace, "}", col});
      ++i;
    } else if (c == '=') {
      out.push_back({T::assign, "=", col});
      ++i;
    } else if (c == ':') {
      out.push_back({T::colon, ":", col});
      ++i;
    } else if (c == ',') {
      out.push_back({T::comma, ",", col});
      ++i;
    } else if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
      out.push_back({T::arrow, "->", col});
      i += 2;
    } else if (c == '"') {
      std::string s;
      ++i;
      bool closed = false;
      while (i < line.size()) {
        char d = line[i++];
        if (d == '"') {
          closed = true;
          break;
        }
        if (d == '\\') {
          if (i >= line.size()) break;
          char e = line[i++];
          if (e == 'n')
            s += '\n';
          else if (e == '"' || e == '\\')
            s += e;
          else
            throw SyntaxFault{static_cast<int>(i) - 1, std::string("unknown escape '\\") + e + "'"};
        } else {
          s += d;
        }
      }
      if (!closed) throw SyntaxFault{col, "unterminated string"};
      out.push_back({T::string, std::move(s), col});
    } else if (digit(c) || ((c == '-' || c == '+' || c == '.') && i + 1 < line.size() &&
                            (digit(line[i + 1]) || line[i + 1] == '.'))) {
      std::size_t j = i + 1;
      while (j < line.size() && (digit(line[j]) || line[j] == '.' || line[j] == 'e' || line[j] == 'E' ||
                                 ((line[j] == '-' || line[j] == '+') && (line[j - 1] == 'e' || line[j - 1] == 'E'))))
        ++j;
      out.push_back({T::number, std::string(line.substr(i, j - i)), col});
      i = j;
    } else if (ident_start(c)) {
      std::size_t j = i;
      while (j < line.size() && ident_char(line[j])) ++j;
      if (j < line.size() && line[j] == '(') {
        auto close = line.find(')', j);
        if (close == std::string_view::npos) throw SyntaxFault{col, "unterminated distribution literal"};
        out.push_back({T::dist, std::string(line.substr(i, close - i + 1)), col});
        i = close + 1;
      } else {
        out.push_back({T::ident, std::string(line.substr(i, j - i)), col});
        i = j;
      }
    } else {
      throw SyntaxFault{col, std::string("unexpected character '") + c + "'"};
    }
  }
  return out;
}

// A value atom is a single token optionally followed by ':' token (value:weight
// or Resource:n).
struct Atom {
  Tok first;
  std::optional<Tok> second;
};

struct Param {
  std::string key;
  int col = 0;
  std::vector<Atom> atoms;
};

struct Args {
  std::vector<Param> params;
  std::vector<Atom> positional;
};

Atom read_atom(const std::vector<Tok>& toks, std::size_t& i) {
  if (i >= toks.size()) throw SyntaxFault{toks.empty() ? 1 : toks.back().col, "missing value"};
  Atom a{toks[i], std::nullopt};
  if (a.first.kind != T::ident && a.first.kind != T::number && a.first.kind != T::string && a.first.kind != T::dist)
    throw SyntaxFault{a.first.col, "unexpected '" + a.first.text + "'"};
  ++i;
  if (i < toks.size() && toks[i].kind == T::colon) {
    ++i;
    if (i >= toks.size() || (toks[i].kind != T::number && toks[i].kind != T::ident))
      throw SyntaxFault{toks[i - 1].col, "expected a value after ':'"};
    a.second = toks[i++];
  }
  return a;
}

Args read_args(const std::vector<Tok>& toks, std::size_t i) {
  Args args;
  while (i < toks.size()) {
    if (toks[i].kind == T::ident && i + 1 < toks.size() && toks[i + 1].kind == T::assign) {
      Param p;
      p.key = toks[i].text;
      p.col = toks[i].col;
      i += 2;
      p.atoms.push_back(read_atom(toks, i));
      while (i < toks.size() && toks[i].kind == T::comma) {
        ++i;
        p.atoms.push_back(read_atom(toks, i));
      }
      args.params.push_back(std::move(p));
    } else {
      args.positional.push_back(read_atom(toks, i));
    }
  }
  return args;
}

double to_real(const Tok& t) {
  if (t.kind != T::number) throw SyntaxFault{t.col, "expected a number, got '" + t.text + "'"};
  std::string_view s = t.text;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw SyntaxFault{t.col, "malformed number '" + t.text + "'"};
  return v;
}

std::int64_t to_int(const Tok& t) {
  double v = to_real(t);
  if (v != std::floor(v) || std::fabs(v) > 9e15) throw SyntaxFault{t.col, "expected an integer, got '" + t.text + "'"};
  return static_cast<std::int64_t>(v);
}

bool to_bool(const Tok& t) {
  if (t.kind == T::ident && t.text == "true") return true;
  if (t.kind == T::ident && t.text == "false") return false;
  throw SyntaxFault{t.col, "expected true or false, got '" + t.text + "'"};
}

std::string to_ident(const Tok& t) {
  if (t.kind != T::ident) throw SyntaxFault{t.col, "expected an identifier, got '" + t.text + "'"};
  return t.text;
}

Distribution to_dist(const Tok& t) {
  if (t.kind != T::dist) throw SyntaxFault{t.col, "expected a distribution literal, got '" + t.text + "'"};
  try {
    return parse_distribution(t.text);
  } catch (const Error& e) {
    throw SyntaxFault{t.col, e.detail()};
  }
}

const Atom& single(const Param& p) {
  if (p.atoms.size() != 1 || p.atoms[0].second)
    throw SyntaxFault{p.col, "parameter '" + p.key + "' takes a single value"};
  return p.atoms[0];
}

ResourceRequest to_request(const Atom& a) {
  if (a.first.kind != T::ident || !a.second)
    throw SyntaxFault{a.first.col, "expected Resource:count, got '" + a.first.text + "'"};
  return {a.first.text, to_int(*a.second)};
}

// Dispatches each key=value to a handler; unknown keys and repeats are errors.
class ParamReader {
 public:
  explicit ParamReader(const Args& args) : args_(args) {}

  void on(const std::string& key, std::function<void(const Param&)> fn) { handlers_[key] = std::move(fn); }

  void run(bool allow_positional = false) {
    std::set<std::string> seen;
    for (const auto& p : args_.params) {
      auto it = handlers_.find(p.key);
      if (it == handlers_.end()) throw SyntaxFault{p.col, "unknown parameter '" + p.key + "'"};
      if (!seen.insert(p.key).second) throw SyntaxFault{p.col, "parameter '" + p.key + "' given twice"};
      it->second(p);
    }
    if (!allow_positional && !args_.positional.empty())
      throw SyntaxFault{args_.positional.front().first.col, "unexpected '" + args_.positional.front().first.text + "'"};
  }

  bool has(const std::string& key) const {
    for (const auto& p : args_.params)
      if (p.key == key) return true;
    return false;
  }

 private:
  const Args& args_;
  std::map<std::string, std::function<void(const Param&)>> handlers_;
};

struct Block {
  enum Kind { model, submodel } kind;
  int line;
  SubmodelDef* sub = nullptr;
};

class ModelParser {
 public:
  ModelParser(std::string_view text, std::string_view filename) : text_(text), file_(filename) {}

  ModelDef parse() {
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text_.size()) {
      auto end = text_.find('\n', start);
      if (end == std::string_view::npos) end = text_.size();
      ++line_no;
      auto line = text_.substr(start, end - start);
      try {
        auto toks = lex_line(line);
        if (!toks.empty()) statement(toks, line_no);
      } catch (const SyntaxFault& f) {
        error(line_no, f.col, f.message);
      }
      if (end == text_.size()) break;
      start = end + 1;
    }
    if (!seen_model_ && diags_.empty()) error(1, 1, "no model block");
    if (!stack_.empty()) error(stack_.back().line, 1, "block is never closed");
    if (!diags_.empty()) throw ModelError(ErrorKind::SyntaxError, std::move(diags_));
    return std::move(model_);
  }

 private:
  void error(int line, int col, std::string msg) {
    Diagnostic d;
    d.file = std::string(file_);
    d.line = line;
    d.col = col;
    d.message = std::move(msg);
    diags_.push_back(std::move(d));
  }

  void statement(const std::vector<Tok>& toks, int line) {
    const Tok& head = toks[0];
    SourceLoc loc{line, head.col};
    if (head.kind == T::rbrace) {
      if (toks.size() > 1) throw SyntaxFault{toks[1].col, "unexpected text after '}'"};
      if (stack_.empty()) throw SyntaxFault{head.col, "unmatched '}'"};
      if (stack_.back().kind == Block::model) closed_model_ = true;
      stack_.pop_back();
      return;
    }
    if (head.kind != T::ident) throw SyntaxFault{head.col, "expected a declaration keyword"};
    const std::string& kw = head.text;

    if (kw == "model") {
      if (seen_model_) throw SyntaxFault{head.col, "only one model block per file"};
      if (toks.size() != 3 || toks[1].kind != T::ident || toks[2].kind != T::lbrace)
        throw SyntaxFault{head.col, "expected 'model <name> {'"};
      seen_model_ = true;
      model_.name = toks[1].text;
      stack_.push_back({Block::model, line});
      return;
    }
    if (stack_.empty()) {
      throw SyntaxFault{head.col, closed_model_ ? "declaration after the model block" : "declaration outside a model block"};
    }
    bool in_sub = stack_.back().kind == Block::submodel;
    SubmodelDef* sub = stack_.back().sub;

    if (kw == "submodel") {
      if (in_sub) throw SyntaxFault{head.col, "submodels cannot nest"};
      if (toks.size() != 3 || toks[1].kind != T::ident || toks[2].kind != T::lbrace)
        throw SyntaxFault{head.col, "expected 'submodel <name> {'"};
      SubmodelDef s;
      s.name = toks[1].text;
      s.loc = loc;
      model_.submodels.push_back(std::move(s));
      stack_.push_back({Block::submodel, line, &model_.submodels.back()});
      return;
    }
    if (kw == "link") {
      if (toks.size() != 4 || toks[1].kind != T::ident || toks[2].kind != T::arrow || toks[3].kind != T::ident)
        throw SyntaxFault{head.col, "expected 'link <from>[.port] -> <to>'"};
      Link l;
      l.from = toks[1].text;
      l.to = toks[3].text;
      l.loc = loc;
      (in_sub ? sub->links : model_.links).push_back(std::move(l));
      return;
    }
    if (kw == "weather" || kw == "breakdown") {
      if (!in_sub) throw SyntaxFault{head.col, "'" + kw + "' is only allowed inside a submodel"};
      auto args = read_args(toks, 1);
      if (kw == "weather")
        sub->weather.push_back(weather(args, loc));
      else
        sub->breakdowns.push_back(breakdown(args, loc));
      return;
    }
    if (auto kind = element_kind_from(kw)) {
      if (toks.size() < 2 || toks[1].kind != T::ident) throw SyntaxFault{head.col, "expected an element id after '" + kw + "'"};
      auto args = read_args(toks, 2);
      auto el = element(*kind, toks[1].text, args, loc);
      (in_sub ? sub->elements : model_.elements).push_back(std::move(el));
      return;
    }
    if (in_sub) throw SyntaxFault{head.col, "'" + kw + "' is not allowed inside a submodel"};

    if (kw == "length") {
      auto args = read_args(toks, 0);
      ParamReader r(args);
      r.on("length", [&](const Param& p) { model_.length_m = to_real(single(p).first); });
      r.run();
      return;
    }
    if (kw == "resource") {
      if (toks.size() < 2 || toks[1].kind != T::ident) throw SyntaxFault{head.col, "expected 'resource <name> servers=<k>'"};
      ResourceDecl d;
      d.name = toks[1].text;
      d.loc = loc;
      auto args = read_args(toks, 2);
      ParamReader r(args);
      r.on("servers", [&](const Param& p) { d.servers = to_int(single(p).first); });
      r.run();
      if (!r.has("servers")) throw SyntaxFault{head.col, "resource needs servers=<k>"};
      model_.resources.push_back(std::move(d));
      return;
    }
    if (kw == "file") {
      if (toks.size() != 2 || toks[1].kind != T::ident) throw SyntaxFault{head.col, "expected 'file <name>'"};
      model_.files.push_back({toks[1].text, loc});
      return;
    }
    if (kw == "state") {
      if (toks.size() != 4 || toks[1].kind != T::ident || toks[2].kind != T::assign)
        throw SyntaxFault{head.col, "expected 'state <name> = <value>'"};
      StateDecl s;
      s.name = toks[1].text;
      s.loc = loc;
      if (toks[3].kind == T::ident)
        s.initial = to_bool(toks[3]);
      else
        s.initial = to_real(toks[3]);
      model_.states.push_back(std::move(s));
      return;
    }
    if (kw == "phase") {
      if (toks.size() < 2 || toks[1].kind != T::number) throw SyntaxFault{head.col, "expected 'phase <number> ...'"};
      PhaseSpec ph;
      ph.number = static_cast<int>(to_int(toks[1]));
      ph.loc = loc;
      auto args = read_args(toks, 2);
      ParamReader r(args);
      r.on("name", [&](const Param& p) {
        const auto& a = single(p);
        if (a.first.kind != T::string) throw SyntaxFault{a.first.col, "phase name must be quoted"};
        ph.name = a.first.text;
      });
      r.on("days", [&](const Param& p) { ph.days = to_real(single(p).first); });
      r.on("uses", [&](const Param& p) {
        for (const auto& a : p.atoms) ph.uses.push_back(to_request(a));
      });
      r.on("weather", [&](const Param& p) { ph.weather_sensitive = to_bool(single(p).first); });
      r.on("after", [&](const Param& p) {
        for (const auto& a : p.atoms) ph.after.push_back(static_cast<int>(to_int(a.first)));
      });
      r.run();
      model_.phases.push_back(std::move(ph));
      return;
    }
    throw SyntaxFault{head.col, "unknown declaration '" + kw + "'"};
  }

  static ElementDef element(ElementKind kind, const std::string& id, const Args& args, SourceLoc loc) {
    ElementDef e;
    e.id = id;
    e.kind = kind;
    e.loc = loc;
    ParamReader r(args);
    bool positional = false;
    auto int_param = [&](const std::string& key) {
      r.on(key, [&e](const Param& p) { e.count = to_int(single(p).first); });
    };
    switch (kind) {
      case ElementKind::create:
        e.dist = Distribution::constant(0);
        int_param("count");
        r.on("interarrival", [&](const Param& p) { e.dist = to_dist(single(p).first); });
        r.on("background", [&](const Param& p) { e.background = to_bool(single(p).first); });
        break;
      case ElementKind::task:
        r.on("dur", [&](const Param& p) { e.dist = to_dist(single(p).first); });
        r.on("valve", [&](const Param& p) { e.valve = to_ident(single(p).first); });
        r.on("usage", [&](const Param& p) { e.usage = to_ident(single(p).first); });
        r.on("phase", [&](const Param& p) { e.phase = static_cast<int>(to_int(single(p).first)); });
        break;
      case ElementKind::capture:
        r.on("file", [&](const Param& p) { e.file = to_ident(single(p).first); });
        positional = true;
        break;
      case ElementKind::release: positional = true; break;
      case ElementKind::preempt:
        r.on("resource", [&](const Param& p) { e.resource = to_ident(single(p).first); });
        break;
      case ElementKind::batch:
      case ElementKind::consolidate: int_param("size"); break;
      case ElementKind::generate: int_param("clones"); break;
      case ElementKind::unbatch:
      case ElementKind::destroy: break;
      case ElementKind::conditional_branch:
        r.on("cond", [&](const Param& p) {
          const auto& a = single(p);
          if (a.first.kind != T::string) throw SyntaxFault{a.first.col, "cond must be a quoted formula"};
          e.formula = a.first.text;
        });
        break;
      case ElementKind::probabilistic_branch:
        r.on("probs", [&](const Param& p) {
          for (const auto& a : p.atoms) {
            if (a.second) throw SyntaxFault{a.first.col, "probs is a list of numbers"};
            e.probs.push_back(to_real(a.first));
          }
        });
        break;
      case ElementKind::valve:
        r.on("state", [&](const Param& p) { e.state = to_ident(single(p).first); });
        break;
      case ElementKind::activator:
        r.on("valve", [&](const Param& p) { e.valve = to_ident(single(p).first); });
        r.on("open", [&](const Param& p) { e.open = to_bool(single(p).first); });
        break;
      case ElementKind::execute:
        r.on("formula", [&](const Param& p) {
          const auto& a = single(p);
          if (a.first.kind != T::string) throw SyntaxFault{a.first.col, "formula must be quoted"};
          e.formula = a.first.text;
        });
        break;
      case ElementKind::counter:
        r.on("tally", [&](const Param& p) { e.tally = to_ident(single(p).first); });
        break;
    }
    r.run(positional);
    if (positional)
      for (const auto& a : args.positional) e.requests.push_back(to_request(a));

    auto require = [&](const char* key) {
      if (!r.has(key)) throw SyntaxFault{loc.col, std::string(to_string(kind)) + " " + id + " needs " + key + "="};
    };
    switch (kind) {
      case ElementKind::task: require("dur"); break;
      case ElementKind::batch:
      case ElementKind::consolidate: require("size"); break;
      case ElementKind::generate: require("clones"); break;
      case ElementKind::preempt: require("resource"); break;
      case ElementKind::conditional_branch: require("cond"); break;
      case ElementKind::probabilistic_branch: require("probs"); break;
      case ElementKind::valve: require("state"); break;
      case ElementKind::activator:
        require("valve");
        require("open");
        break;
      case ElementKind::execute: require("formula"); break;
      case ElementKind::capture:
      case ElementKind::release:
        if (e.requests.empty()) throw SyntaxFault{loc.col, std::string(to_string(kind)) + " " + id + " needs at least one Resource:count"};
        break;
      default: break;
    }
    return e;
  }

  static WeatherSpec weather(const Args& args, SourceLoc loc) {
    WeatherSpec w;
    w.loc = loc;
    ParamReader r(args);
    r.on("valve", [&](const Param& p) { w.valve = to_ident(single(p).first); });
    r.on("cycle", [&](const Param& p) { w.cycle_days = to_real(single(p).first); });
    r.on("probability", [&](const Param& p) { w.probability = to_real(single(p).first); });
    r.on("outage", [&](const Param& p) { w.outage = to_dist(single(p).first); });
    r.run();
    if (!r.has("valve")) throw SyntaxFault{loc.col, "weather needs valve="};
    return w;
  }

  static BreakdownSpec breakdown(const Args& args, SourceLoc loc) {
    BreakdownSpec b;
    b.loc = loc;
    ParamReader r(args);
    r.on("resource", [&](const Param& p) { b.resource = to_ident(single(p).first); });
    r.on("trigger", [&](const Param& p) { b.trigger = to_dist(single(p).first); });
    r.on("major", [&](const Param& p) { b.major_probability = to_real(single(p).first); });
    r.on("minor_repair", [&](const Param& p) { b.minor_repair = to_dist(single(p).first); });
    r.on("major_repair", [&](const Param& p) { b.major_repair = to_dist(single(p).first); });
    r.on("clock", [&](const Param& p) {
      auto word = to_ident(single(p).first);
      if (word == "usage")
        b.clock = BreakdownClock::usage;
      else if (word == "calendar")
        b.clock = BreakdownClock::calendar;
      else
        throw SyntaxFault{p.col, "clock is usage or calendar"};
    });
    r.run();
    if (!r.has("resource")) throw SyntaxFault{loc.col, "breakdown needs resource="};
    return b;
  }

  std::string_view text_;
  std::string_view file_;
  ModelDef model_;
  std::vector<Block> stack_;
  std::vector<Diagnostic> diags_;
  bool seen_model_ = false;
  bool closed_model_ = false;
};

class ScenarioParser {
 public:
  ScenarioParser(std::string_view text, std::string_view filename) : text_(text), file_(filename) {}

  std::vector<ScenarioOverlay> parse() {
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text_.size()) {
      auto end = text_.find('\n', start);
      if (end == std::string_view::npos) end = text_.size();
      ++line_no;
      try {
        auto toks = lex_line(text_.substr(start, end - start));
        if (!toks.empty()) statement(toks, line_no);
      } catch (const SyntaxFault& f) {
        error(line_no, f.col, f.message);
      }
      if (end == text_.size()) break;
      start = end + 1;
    }
    if (current_) error(open_line_, 1, "scenario block is never closed");
    if (out_.empty() && diags_.empty()) error(1, 1, "no scenario block");
    if (!diags_.empty()) throw ModelError(ErrorKind::SyntaxError, std::move(diags_));
    return std::move(out_);
  }

 private:
  void error(int line, int col, std::string msg) {
    Diagnostic d;
    d.file = std::string(file_);
    d.line = line;
    d.col = col;
    d.message = std::move(msg);
    diags_.push_back(std::move(d));
  }

  void statement(const std::vector<Tok>& toks, int line) {
    const Tok& head = toks[0];
    if (head.kind == T::rbrace) {
      if (!current_ || toks.size() > 1) throw SyntaxFault{head.col, "unmatched '}'"};
      out_.push_back(std::move(*current_));
      current_.reset();
      return;
    }
    if (head.kind != T::ident) throw SyntaxFault{head.col, "expected a keyword"};
    if (head.text == "scenario") {
      if (current_) throw SyntaxFault{head.col, "scenario blocks cannot nest"};
      ScenarioOverlay s;
      std::size_t brace = 2;
      if (toks.size() >= 3 && toks[1].kind == T::ident && toks[2].kind == T::ident && toks[2].text == "extends") {
        if (toks.size() != 5 || toks[3].kind != T::ident) throw SyntaxFault{head.col, "expected 'scenario <name> extends <base> {'"};
        const ScenarioOverlay* base = nullptr;
        for (const auto& o : out_)
          if (o.name == toks[3].text) base = &o;
        if (!base) throw SyntaxFault{toks[3].col, "unknown base scenario '" + toks[3].text + "'"};
        s = *base;
        s.comment.clear();
        brace = 4;
      }
      if (toks.size() != brace + 1 || toks[1].kind != T::ident || toks[brace].kind != T::lbrace)
        throw SyntaxFault{head.col, "expected 'scenario <name> [extends <base>] {'"};
      for (const auto& o : out_)
        if (o.name == toks[1].text) throw SyntaxFault{toks[1].col, "duplicate scenario '" + toks[1].text + "'"};
      s.name = toks[1].text;
      current_ = std::move(s);
      open_line_ = line;
      return;
    }
    if (!current_) throw SyntaxFault{head.col, "declaration outside a scenario block"};
    auto& s = *current_;
    if (head.text == "comment") {
      if (toks.size() != 2 || toks[1].kind != T::string) throw SyntaxFault{head.col, "expected 'comment \"...\"'"};
      s.comment = toks[1].text;
    } else if (head.text == "resource") {
      if (toks.size() != 5 || toks[1].kind != T::ident || toks[2].text != "servers" || toks[3].kind != T::assign)
        throw SyntaxFault{head.col, "expected 'resource <name> servers=<k>'"};
      s.resource_overrides[toks[1].text] = to_int(toks[4]);
    } else if (head.text == "submodel") {
      if (toks.size() != 3 || toks[1].kind != T::ident || toks[2].kind != T::ident ||
          (toks[2].text != "on" && toks[2].text != "off"))
        throw SyntaxFault{head.col, "expected 'submodel <name> on|off'"};
      s.submodel_toggles[toks[1].text] = toks[2].text == "on";
    } else {
      auto args = read_args(toks, 0);
      ParamReader r(args);
      r.on("replications", [&](const Param& p) { s.replications = static_cast<int>(to_int(single(p).first)); });
      r.on("seed", [&](const Param& p) {
        const Tok& t = single(p).first;
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (t.kind != T::number || ec != std::errc() || ptr != t.text.data() + t.text.size())
          throw SyntaxFault{p.col, "seed must be a non-negative integer"};
        s.master_seed = v;
      });
      r.on("noise", [&](const Param& p) {
        auto w = to_ident(single(p).first);
        if (w == "off")
          s.noise = NoiseMode::off;
        else if (w == "triangular10")
          s.noise = NoiseMode::triangular10;
        else
          throw SyntaxFault{p.col, "noise is off or triangular10"};
      });
      r.run();
    }
  }

  std::string_view text_;
  std::string_view file_;
  std::vector<ScenarioOverlay> out_;
  std::optional<ScenarioOverlay> current_;
  int open_line_ = 0;
  std::vector<Diagnostic> diags_;
};

}  // namespace

// "a.2" names port 2 of element "a" unless an element is literally called "a.2".
void resolve_ports(ModelDef& m) {
  std::set<std::string> ids;
  for (const auto& e : m.elements) ids.insert(e.id);
  for (const auto& s : m.submodels)
    for (const auto& e : s.elements) ids.insert(e.id);
  auto fix = [&](Link& l) {
    if (ids.count(l.from)) return;
    auto dot = l.from.rfind('.');
    if (dot == std::string::npos || dot + 1 == l.from.size()) return;
    auto suffix = std::string_view(l.from).substr(dot + 1);
    int port = 0;
    auto [ptr, ec] = std::from_chars(suffix.data(), suffix.data() + suffix.size(), port);
    if (ec != std::errc() || ptr != suffix.data() + suffix.size() || port < 0) return;
    l.port = port;
    l.from.resize(dot);
  };
  for (auto& l : m.links) fix(l);
  for (auto& s : m.submodels)
    for (auto& l : s.links) fix(l);
}

ModelDef parse_model(std::string_view text, std::string_view filename) {
  auto m = ModelParser(text, filename).parse();
  resolve_ports(m);
  return m;
}

std::vector<ScenarioOverlay> parse_scenarios(std::string_view text, std::string_view filename) {
  return ScenarioParser(text, filename).parse();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace berthsim
