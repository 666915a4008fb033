#include <cctype>
#include <cstdlib>
#include <optional>
#include <set>
#include <unordered_map>

#include "stacksim/netlist.hpp"

namespace stacksim {

namespace {

struct Token {
  std::string text; // lowercased
  int column;       // 1-based
};

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// whitespace-separated tokens; '(' and ')' act as separators too
std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> out;
  std::string cur;
  int start = 0;
  auto flush = [&](int end_col) {
    if (!cur.empty()) out.push_back({lower(cur), start + 1});
    cur.clear();
    (void)end_col;
  };
  for (int i = 0; i < static_cast<int>(line.size()); ++i) {
    char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ',') {
      flush(i);
    } else {
      if (cur.empty()) start = i;
      cur += c;
    }
  }
  flush(static_cast<int>(line.size()));
  return out;
}

std::optional<double> parse_number(const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin) return std::nullopt;
  double scale = 1.0;
  if (*end != '\0') {
    switch (*end) {
      case 'k': scale = 1e3; break;
      case 'm': scale = 1e-3; break;
      case 'u': scale = 1e-6; break;
      case 'n': scale = 1e-9; break;
      case 'p': scale = 1e-12; break;
      case 'f': scale = 1e-15; break;
      default: return std::nullopt;
    }
    if (*(end + 1) != '\0') return std::nullopt;
  }
  return v * scale;
}

struct LineParser {
  const std::vector<Token>& toks;
  int line;
  std::vector<Diagnostic>& diags;
  bool failed = false;

  void error(int col, const std::string& msg) {
    diags.push_back({line, col, Severity::Error, msg});
    failed = true;
  }

  bool need_arity(size_t count, const char* what) {
    if (toks.size() < count) {
      error(toks.back().column, std::string("arity mismatch: ") + what);
      return false;
    }
    return true;
  }

  double number_at(size_t i, const char* what) {
    auto v = parse_number(toks[i].text);
    if (!v) {
      error(toks[i].column, std::string("expected a number for ") + what + ", got '" +
                                toks[i].text + "'");
      return 0.0;
    }
    return *v;
  }

  // key=value pairs from token i onward
  std::unordered_map<std::string, double> keyvals(size_t i, int* first_col = nullptr) {
    std::unordered_map<std::string, double> kv;
    for (; i < toks.size(); ++i) {
      const std::string& t = toks[i].text;
      auto eq = t.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 >= t.size()) {
        error(toks[i].column, "expected key=value, got '" + t + "'");
        continue;
      }
      auto v = parse_number(t.substr(eq + 1));
      if (!v) {
        error(toks[i].column, "bad value in '" + t + "'");
        continue;
      }
      if (first_col && kv.empty()) *first_col = toks[i].column;
      kv[t.substr(0, eq)] = *v;
    }
    return kv;
  }
};

// Deliberately strict: the first line is the title unless it is unmistakably
// a card, so ordinary prose titles never get eaten as devices.
bool looks_like_card(const std::vector<Token>& toks) {
  if (toks.empty()) return false;
  const std::string& t = toks[0].text;
  if (t[0] == '.') return true;
  auto all_keyvals = [&](size_t from) {
    for (size_t i = from; i < toks.size(); ++i)
      if (toks[i].text.find('=') == std::string::npos) return false;
    return true;
  };
  switch (t[0]) {
    case 'r':
    case 'c': return toks.size() == 4 && parse_number(toks[3].text).has_value();
    case 'v':
      if (toks.size() == 4) return parse_number(toks[3].text).has_value();
      if (toks.size() == 5) return toks[3].text == "dc" && parse_number(toks[4].text).has_value();
      return toks.size() == 11 && toks[3].text == "pulse";
    case 'm': return toks.size() >= 7 && all_keyvals(6);
    case 'a': return toks.size() >= 6 && all_keyvals(5);
    case 's': return toks.size() >= 5 && all_keyvals(4);
    default: return false;
  }
}

} // namespace

ParseResult parse_netlist(const std::string& source) {
  ParseResult result;
  std::vector<Diagnostic>& diags = result.diagnostics;

  Netlist nl;
  std::set<std::string> instance_names;
  struct PendingModelRef {
    std::string model;
    int line, column;
  };
  std::vector<PendingModelRef> model_refs;
  bool ended = false;
  bool have_title = false;

  int line_no = 0;
  size_t pos = 0;
  while (pos <= source.size()) {
    size_t nl_pos = source.find('\n', pos);
    std::string line = source.substr(pos, nl_pos == std::string::npos ? std::string::npos
                                                                      : nl_pos - pos);
    pos = (nl_pos == std::string::npos) ? source.size() + 1 : nl_pos + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<Token> toks = tokenize(line);

    // title: first line, unless it is unmistakably a card
    if (!have_title) {
      have_title = true;
      if (!looks_like_card(toks)) {
        nl.title = line;
        continue;
      }
    }
    if (toks.empty()) continue;
    if (toks[0].text[0] == '*' || toks[0].text[0] == ';') continue;
    if (ended) continue; // anything after .end is ignored

    LineParser lp{toks, line_no, diags};
    const std::string& head = toks[0].text;

    if (head[0] == '.') {
      if (head == ".end") {
        ended = true;
      } else if (head == ".op") {
        nl.directives.op = true;
      } else if (head == ".tran") {
        if (lp.need_arity(3, ".tran needs <step> <stop>")) {
          TranDirective t;
          t.dt = lp.number_at(1, ".tran step");
          t.tstop = lp.number_at(2, ".tran stop");
          if (!lp.failed) nl.directives.tran = t;
        }
      } else if (head == ".model") {
        if (lp.need_arity(3, ".model needs <name> <nmos|pmos>")) {
          const std::string name = toks[1].text;
          const std::string type = toks[2].text;
          MosParams p;
          if (type == "pmos")
            p = default_pmos();
          else if (type == "nmos")
            p = default_nmos();
          else
            lp.error(toks[2].column, "unknown model type '" + type + "'");
          auto kv = lp.keyvals(3);
          for (const auto& [k, v] : kv) {
            if (k == "vth0") p.vth0 = v;
            else if (k == "kp") p.kp = v;
            else if (k == "n") p.n_slope = v;
            else if (k == "eta") p.eta_dibl = v;
            else if (k == "lambda") p.lambda_clm = v;
            else if (k == "vt") p.temp_vt = v;
            else lp.error(toks[0].column, "unknown model parameter '" + k + "'");
          }
          if (!lp.failed) {
            if (nl.model_cards.count(name))
              lp.error(toks[1].column, "duplicate model '" + name + "'");
            else
              nl.model_cards.emplace(name, p);
          }
        }
      } else {
        lp.error(toks[0].column, "unknown directive '" + head + "'");
      }
      continue;
    }

    DeviceInstance dev;
    dev.name = head;
    bool recognized = true;
    switch (head[0]) {
      case 'r':
      case 'c': {
        if (!lp.need_arity(4, "R/C needs <a> <b> <value>")) break;
        dev.kind = head[0] == 'r' ? DeviceKind::Resistor : DeviceKind::Capacitor;
        dev.nodes = {toks[1].text, toks[2].text};
        dev.value = lp.number_at(3, "value");
        if (toks.size() > 4) lp.error(toks[4].column, "arity mismatch: trailing tokens");
        break;
      }
      case 'v': {
        if (!lp.need_arity(4, "V needs <p> <n> DC <v> or PULSE(...)")) break;
        dev.nodes = {toks[1].text, toks[2].text};
        if (toks[3].text == "dc") {
          dev.kind = DeviceKind::DcSource;
          if (lp.need_arity(5, "V DC needs a level")) dev.value = lp.number_at(4, "DC level");
        } else if (toks[3].text == "pulse") {
          dev.kind = DeviceKind::PulseSource;
          if (lp.need_arity(11, "PULSE needs 7 values")) {
            double* f[7] = {&dev.pulse.v1,   &dev.pulse.v2,    &dev.pulse.delay,
                            &dev.pulse.rise, &dev.pulse.fall,  &dev.pulse.width,
                            &dev.pulse.period};
            for (int i = 0; i < 7; ++i) *f[i] = lp.number_at(4 + i, "PULSE value");
            if (toks.size() > 11) lp.error(toks[11].column, "arity mismatch: trailing tokens");
          }
        } else if (auto v = parse_number(toks[3].text)) {
          dev.kind = DeviceKind::DcSource; // bare level means DC
          dev.value = *v;
        } else {
          lp.error(toks[3].column, "expected DC or PULSE, got '" + toks[3].text + "'");
        }
        break;
      }
      case 'm': {
        if (!lp.need_arity(6, "M needs <d> <g> <s> <b> <model>")) break;
        dev.kind = DeviceKind::Mos;
        dev.nodes = {toks[1].text, toks[2].text, toks[3].text, toks[4].text};
        dev.model = toks[5].text;
        double w = 1.0, l = 1.0;
        auto kv = lp.keyvals(6);
        for (const auto& [k, v] : kv) {
          if (k == "w") w = v;
          else if (k == "l") l = v;
          else lp.error(toks[0].column, "unknown device parameter '" + k + "'");
        }
        if (l <= 0.0)
          lp.error(toks[0].column, "L must be positive");
        else
          dev.w_over_l = w / l;
        model_refs.push_back({dev.model, line_no, toks[5].column});
        break;
      }
      case 'a': {
        if (!lp.need_arity(5, "A needs <plus> <minus> <out> <ref>")) break;
        dev.kind = DeviceKind::SenseAmp;
        dev.nodes = {toks[1].text, toks[2].text, toks[3].text, toks[4].text};
        auto kv = lp.keyvals(5);
        for (const auto& [k, v] : kv) {
          if (k == "gain") dev.senseamp.gain = v;
          else if (k == "vlo") dev.senseamp.vlo = v;
          else if (k == "vhi") dev.senseamp.vhi = v;
          else lp.error(toks[0].column, "unknown device parameter '" + k + "'");
        }
        break;
      }
      case 's': {
        if (!lp.need_arity(4, "S needs <p> <n> <c>")) break;
        dev.kind = DeviceKind::Switch;
        dev.nodes = {toks[1].text, toks[2].text, toks[3].text};
        auto kv = lp.keyvals(4);
        for (const auto& [k, v] : kv) {
          if (k == "ron") dev.sw.ron = v;
          else if (k == "roff") dev.sw.roff = v;
          else if (k == "vt") dev.sw.vt = v;
          else if (k == "inv") dev.sw.inverted = v != 0.0;
          else lp.error(toks[0].column, "unknown device parameter '" + k + "'");
        }
        break;
      }
      default:
        recognized = false;
        lp.error(toks[0].column, "unknown card letter '" + std::string(1, head[0]) + "'");
    }
    if (!recognized || lp.failed) continue;

    if (!instance_names.insert(dev.name).second) {
      lp.error(toks[0].column, "duplicate instance '" + dev.name + "'");
      continue;
    }
    nl.devices.push_back(std::move(dev));
  }

  // positioned missing-model diagnostics
  for (const auto& ref : model_refs)
    if (!nl.model_cards.count(ref.model))
      diags.push_back({ref.line, ref.column, Severity::Error, "missing model '" + ref.model + "'"});

  // remaining invariants from the validator; skip the classes already
  // reported above with real positions
  for (const auto& d : validate(nl)) {
    if (d.message.rfind("duplicate instance", 0) == 0) continue;
    if (d.message.rfind("missing model", 0) == 0) continue;
    diags.push_back(d);
  }

  bool any_error = false;
  for (const auto& d : diags)
    if (d.severity == Severity::Error) any_error = true;
  if (!any_error) result.netlist = std::move(nl);
  return result;
}

} // namespace stacksim
