#pragma once

// JSON system descriptions: parsing with line/field diagnostics and
// serialization back to the same schema.

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "model.hpp"

namespace rqcp {

using json = nlohmann::ordered_json;

class ParseError : public InputError {
 public:
  using InputError::InputError;
};

struct SystemFile {
  Rqcp system;
  std::optional<std::vector<int>> target;
};

namespace detail {

class Reader {
 public:
  Rqcp sys;
  std::map<std::string, int> process_ids, channel_ids, message_ids;

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ParseError(path + ": " + what);
  }

  static const json& field(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, "missing field \"" + key + "\"");
    return *it;
  }

  static std::string str(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  static const json& array(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array");
    return v;
  }

  static int lookup(const std::map<std::string, int>& ids, const std::string& name, const std::string& what,
                    const std::string& path) {
    auto it = ids.find(name);
    if (it == ids.end()) fail(path, "unknown " + what + " \"" + name + "\"");
    return it->second;
  }

  Action action(const json& v, int p, const std::map<std::string, int>& symbols, const std::string& path) const {
    const std::string kind = str(field(v, "kind", path), path + ".kind");
    if (kind == "send" || kind == "recv") {
      const int c = lookup(channel_ids, str(field(v, "channel", path), path + ".channel"), "channel", path + ".channel");
      const int m = lookup(message_ids, str(field(v, "msg", path), path + ".msg"), "message", path + ".msg");
      return kind == "send" ? Action::send(c, m) : Action::recv(c, m);
    }
    if (kind == "push" || kind == "pop") {
      const int g = lookup(symbols, str(field(v, "symbol", path), path + ".symbol"), "stack symbol", path + ".symbol");
      return kind == "push" ? Action::push(g) : Action::pop(g);
    }
    if (kind == "local") {
      std::string label = v.contains("label") ? str(v["label"], path + ".label") : std::string();
      if (!label.empty() && label[0] == '#') fail(path + ".label", "labels starting with '#' are reserved");
      return Action::local(std::move(label));
    }
    (void)p;
    fail(path + ".kind", "unknown action kind \"" + kind + "\"");
  }

  static std::map<std::string, int> names(const json& arr, const std::string& path, std::vector<std::string>& out,
                                          const std::string& what) {
    std::map<std::string, int> ids;
    array(arr, path);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string n = str(arr[i], path + "[" + std::to_string(i) + "]");
      if (!ids.emplace(n, static_cast<int>(out.size())).second) {
        fail(path + "[" + std::to_string(i) + "]", "duplicate " + what + " \"" + n + "\"");
      }
      out.push_back(n);
    }
    return ids;
  }

  SystemFile read(const json& root) {
    if (!root.is_object()) fail("$", "expected an object");
    process_ids = names(field(root, "processes", "$"), "processes", sys.topology.processes, "process");
    message_ids = names(field(root, "messages", "$"), "messages", sys.messages, "message");

    const json& chans = array(field(root, "channels", "$"), "channels");
    for (std::size_t i = 0; i < chans.size(); ++i) {
      const std::string path = "channels[" + std::to_string(i) + "]";
      const json& ch = chans[i];
      Channel c;
      c.name = str(field(ch, "id", path), path + ".id");
      c.src = lookup(process_ids, str(field(ch, "src", path), path + ".src"), "process", path + ".src");
      c.dst = lookup(process_ids, str(field(ch, "dst", path), path + ".dst"), "process", path + ".dst");
      if (!channel_ids.emplace(c.name, static_cast<int>(sys.topology.channels.size())).second) {
        fail(path + ".id", "duplicate channel \"" + c.name + "\"");
      }
      const int id = static_cast<int>(sys.topology.channels.size());
      if (ch.contains("restricted")) {
        const json& r = array(ch["restricted"], path + ".restricted");
        for (std::size_t k = 0; k < r.size(); ++k) {
          const std::string end = str(r[k], path + ".restricted[" + std::to_string(k) + "]");
          if (end == "src") {
            sys.topology.restricted.emplace(c.src, id);
          } else if (end == "dst") {
            sys.topology.restricted.emplace(c.dst, id);
          } else {
            fail(path + ".restricted[" + std::to_string(k) + "]", "expected \"src\" or \"dst\"");
          }
        }
      }
      sys.topology.channels.push_back(std::move(c));
    }

    const json& pds = field(root, "pushdowns", "$");
    if (!pds.is_object()) fail("pushdowns", "expected an object keyed by process");
    for (const auto& [name, _] : pds.items()) lookup(process_ids, name, "process", "pushdowns." + name);
    for (const auto& pname : sys.topology.processes) {
      const std::string path = "pushdowns." + pname;
      const int p = process_ids.at(pname);
      const json& v = field(pds, pname, "pushdowns");
      PushdownProcess pd;
      const auto state_ids = names(field(v, "states", path), path + ".states", pd.states, "state");
      pd.init = lookup(state_ids, str(field(v, "init", path), path + ".init"), "state", path + ".init");
      std::map<std::string, int> symbol_ids;
      if (v.contains("stack_alphabet")) symbol_ids = names(v["stack_alphabet"], path + ".stack_alphabet", pd.stack_alphabet, "stack symbol");
      const json& ts = array(field(v, "transitions", path), path + ".transitions");
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const std::string tp = path + ".transitions[" + std::to_string(i) + "]";
        Transition t;
        t.from = lookup(state_ids, str(field(ts[i], "from", tp), tp + ".from"), "state", tp + ".from");
        t.to = lookup(state_ids, str(field(ts[i], "to", tp), tp + ".to"), "state", tp + ".to");
        t.action = action(field(ts[i], "action", tp), p, symbol_ids, tp + ".action");
        pd.transitions.push_back(std::move(t));
      }
      if (v.contains("eps_actions")) {
        const json& eps = array(v["eps_actions"], path + ".eps_actions");
        for (std::size_t i = 0; i < eps.size(); ++i) {
          pd.eps_actions.insert(action(eps[i], p, symbol_ids, path + ".eps_actions[" + std::to_string(i) + "]"));
        }
      }
      sys.processes.push_back(std::move(pd));
    }

    SystemFile out;
    if (root.contains("target")) {
      const json& t = root["target"];
      if (!t.is_object()) fail("target", "expected an object keyed by process");
      std::vector<int> target(sys.processes.size(), -1);
      for (const auto& [pname, st] : t.items()) {
        const int p = lookup(process_ids, pname, "process", "target." + pname);
        const auto& states = sys.processes[p].states;
        const std::string s = str(st, "target." + pname);
        auto it = std::find(states.begin(), states.end(), s);
        if (it == states.end()) fail("target." + pname, "unknown state \"" + s + "\"");
        target[p] = static_cast<int>(it - states.begin());
      }
      for (std::size_t p = 0; p < target.size(); ++p) {
        if (target[p] < 0) fail("target", "no state given for process \"" + sys.topology.processes[p] + "\"");
      }
      out.target = std::move(target);
    }
    if (auto v = validate_system(sys); !v.empty()) {
      std::string msg = "invalid system:";
      for (const auto& s : v) msg += "\n  " + s;
      throw ParseError(msg);
    }
    out.system = std::move(sys);
    return out;
  }
};

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) line += text[i] == '\n';
  return line;
}

}  // namespace detail

inline SystemFile parse_system_text(const std::string& text, const std::string& origin = "<input>") {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ":" + std::to_string(detail::line_of(text, e.byte)) + ": syntax error: " + e.what());
  }
  try {
    detail::Reader r;
    return r.read(root);
  } catch (const ParseError& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

inline SystemFile parse_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_system_text(ss.str(), path);
}

inline json action_to_json(const Rqcp& sys, int p, const Action& a) {
  json j;
  switch (a.kind) {
    case ActionKind::Send:
    case ActionKind::Recv:
      j["kind"] = a.kind == ActionKind::Send ? "send" : "recv";
      j["channel"] = sys.topology.channels[a.channel].name;
      j["msg"] = sys.messages[a.message];
      break;
    case ActionKind::Push:
    case ActionKind::Pop:
      j["kind"] = a.kind == ActionKind::Push ? "push" : "pop";
      j["symbol"] = sys.processes[p].stack_alphabet[a.symbol];
      break;
    case ActionKind::Local:
      j["kind"] = "local";
      j["label"] = a.label;
      break;
  }
  return j;
}

inline json system_to_json(const Rqcp& sys, const std::optional<std::vector<int>>& target = std::nullopt) {
  const auto& topo = sys.topology;
  json root;
  root["processes"] = topo.processes;
  json chans = json::array();
  for (int c = 0; c < topo.num_channels(); ++c) {
    const auto& ch = topo.channels[c];
    json r = json::array();
    if (topo.is_restricted(ch.src, c)) r.push_back("src");
    if (topo.is_restricted(ch.dst, c)) r.push_back("dst");
    chans.push_back({{"id", ch.name}, {"src", topo.processes[ch.src]}, {"dst", topo.processes[ch.dst]}, {"restricted", r}});
  }
  root["channels"] = chans;
  root["messages"] = sys.messages;
  json pds = json::object();
  for (std::size_t p = 0; p < sys.processes.size(); ++p) {
    const auto& pd = sys.processes[p];
    json v;
    v["states"] = pd.states;
    v["init"] = pd.states[pd.init];
    v["stack_alphabet"] = pd.stack_alphabet;
    json eps = json::array();
    for (const auto& a : pd.eps_actions) eps.push_back(action_to_json(sys, static_cast<int>(p), a));
    v["eps_actions"] = eps;
    json ts = json::array();
    for (const auto& t : pd.transitions) {
      ts.push_back({{"from", pd.states[t.from]}, {"to", pd.states[t.to]}, {"action", action_to_json(sys, static_cast<int>(p), t.action)}});
    }
    v["transitions"] = ts;
    pds[topo.processes[p]] = v;
  }
  root["pushdowns"] = pds;
  if (target) {
    json t = json::object();
    for (std::size_t p = 0; p < target->size(); ++p) t[topo.processes[p]] = sys.processes[p].states[(*target)[p]];
    root["target"] = t;
  }
  return root;
}

// Comma-separated state names in process declaration order.
inline std::vector<int> parse_control_vector(const Rqcp& sys, const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == ',') {
      parts.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  parts.push_back(cur);
  if (parts.size() != sys.processes.size()) {
    throw InputError("target vector has " + std::to_string(parts.size()) + " entries, expected " +
                     std::to_string(sys.processes.size()));
  }
  std::vector<int> out;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& states = sys.processes[p].states;
    auto it = std::find(states.begin(), states.end(), parts[p]);
    if (it == states.end()) {
      throw InputError("unknown state \"" + parts[p] + "\" for process \"" + sys.topology.processes[p] + "\"");
    }
    out.push_back(static_cast<int>(it - states.begin()));
  }
  return out;
}

}  // namespace rqcp
