#include "evsec/process.hpp"

#include <mutex>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace evsec {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
}

process finish(std::shared_ptr<process_node> n) {
  std::size_t h = mix(0xa5a5, static_cast<std::size_t>(n->kind));
  h = mix(h, static_cast<std::size_t>(n->chan + 1));
  h = mix(h, static_cast<std::size_t>(n->var + 1));
  h = mix(h, static_cast<std::size_t>(n->name_id + 1));
  h = mix(h, static_cast<std::size_t>(n->phase));
  if (n->payload) {
    h = mix(h, n->payload->hash);
    n->has_choice = n->has_choice || n->payload->has_choice;
  }
  for (const process& c : {n->cont, n->alt})
    if (c) {
      h = mix(h, c->hash);
      n->has_choice = n->has_choice || c->has_choice;
    }
  n->hash = h;
  return n;
}

}  // namespace

process p_null() {
  static process nil = [] {
    auto n = std::make_shared<process_node>();
    n->kind = proc_kind::null;
    return finish(std::move(n));
  }();
  return nil;
}

process p_in(int chan, int var, process cont, int hint_role, int hint_index) {
  auto n = std::make_shared<process_node>();
  n->kind = proc_kind::input;
  n->chan = chan;
  n->var = var;
  n->cont = std::move(cont);
  n->hint_role = hint_role;
  n->hint_index = hint_index;
  return finish(std::move(n));
}

process p_out(int chan, term payload, process cont) {
  auto n = std::make_shared<process_node>();
  n->kind = proc_kind::output;
  n->chan = chan;
  n->payload = std::move(payload);
  n->cont = std::move(cont);
  return finish(std::move(n));
}

process p_let(int var, term payload, process then_p, process else_p) {
  auto n = std::make_shared<process_node>();
  n->kind = proc_kind::let_;
  n->var = var;
  n->payload = std::move(payload);
  n->cont = std::move(then_p);
  n->alt = std::move(else_p);
  return finish(std::move(n));
}

process p_par(process left, process right) {
  auto n = std::make_shared<process_node>();
  n->kind = proc_kind::parallel;
  n->cont = std::move(left);
  n->alt = std::move(right);
  return finish(std::move(n));
}

process p_new(int name_id, process cont) {
  auto n = std::make_shared<process_node>();
  n->kind = proc_kind::new_;
  n->name_id = name_id;
  n->cont = std::move(cont);
  return finish(std::move(n));
}

process p_repl(process body) {
  auto n = std::make_shared<process_node>();
  n->kind = proc_kind::repl;
  n->cont = std::move(body);
  return finish(std::move(n));
}

process p_phase(int phase, process body) {
  auto n = std::make_shared<process_node>();
  n->kind = proc_kind::phase;
  n->phase = phase;
  n->cont = std::move(body);
  return finish(std::move(n));
}

bool equal(const process& a, const process& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->hash != b->hash || a->kind != b->kind || a->chan != b->chan ||
      a->var != b->var || a->name_id != b->name_id || a->phase != b->phase)
    return false;
  if ((a->payload != nullptr) != (b->payload != nullptr)) return false;
  if (a->payload && !equal(a->payload, b->payload)) return false;
  return equal(a->cont, b->cont) && equal(a->alt, b->alt);
}

std::string to_string(const signature& sig, const process& p) {
  if (!p) return "";
  switch (p->kind) {
    case proc_kind::null:
      return "0";
    case proc_kind::input: {
      std::string s = "in(" + channels::display(p->chan) + "," +
                      atoms::display(term_kind::var, p->var) + ")";
      if (p->cont->kind != proc_kind::null) s += "." + to_string(sig, p->cont);
      return s;
    }
    case proc_kind::output: {
      std::string s = "out(" + channels::display(p->chan) + "," + to_string(sig, p->payload) + ")";
      if (p->cont->kind != proc_kind::null) s += "." + to_string(sig, p->cont);
      return s;
    }
    case proc_kind::let_: {
      std::string s = "let " + atoms::display(term_kind::var, p->var) + "=" +
                      to_string(sig, p->payload) + " in " + to_string(sig, p->cont);
      if (p->alt && p->alt->kind != proc_kind::null)
        s += " else " + to_string(sig, p->alt);
      return "(" + s + ")";
    }
    case proc_kind::parallel:
      return "(" + to_string(sig, p->cont) + " | " + to_string(sig, p->alt) + ")";
    case proc_kind::new_:
      return "new " + atoms::display(term_kind::name, p->name_id) + "." +
             to_string(sig, p->cont);
    case proc_kind::repl:
      return "!" + to_string(sig, p->cont);
    case proc_kind::phase:
      return "phase " + std::to_string(p->phase) + "." + to_string(sig, p->cont);
  }
  return "?";
}

process subst_process(const signature& sig, const process& p, const substitution& s) {
  if (!p || s.empty()) return p;
  switch (p->kind) {
    case proc_kind::null:
      return p;
    case proc_kind::input: {
      substitution pruned;
      for (const auto& [k, v] : s.entries())
        if (!(k.first == term_kind::var && k.second == p->var)) pruned.bind(k.first, k.second, v);
      return p_in(p->chan, p->var, subst_process(sig, p->cont, pruned), p->hint_role,
                  p->hint_index);
    }
    case proc_kind::output:
      return p_out(p->chan, s.apply(sig, p->payload), subst_process(sig, p->cont, s));
    case proc_kind::let_: {
      substitution pruned;
      for (const auto& [k, v] : s.entries())
        if (!(k.first == term_kind::var && k.second == p->var)) pruned.bind(k.first, k.second, v);
      return p_let(p->var, s.apply(sig, p->payload), subst_process(sig, p->cont, pruned),
                   subst_process(sig, p->alt, s));
    }
    case proc_kind::parallel:
      return p_par(subst_process(sig, p->cont, s), subst_process(sig, p->alt, s));
    case proc_kind::new_: {
      substitution pruned;
      for (const auto& [k, v] : s.entries())
        if (!(k.first == term_kind::name && k.second == p->name_id))
          pruned.bind(k.first, k.second, v);
      return p_new(p->name_id, subst_process(sig, p->cont, pruned));
    }
    case proc_kind::repl:
      return p_repl(subst_process(sig, p->cont, s));
    case proc_kind::phase:
      return p_phase(p->phase, subst_process(sig, p->cont, s));
  }
  return p;
}

process project_process(const signature& sig, const process& p, side sd) {
  if (!p || !p->has_choice) return p;
  switch (p->kind) {
    case proc_kind::input:
      return p_in(p->chan, p->var, project_process(sig, p->cont, sd), p->hint_role,
                  p->hint_index);
    case proc_kind::output:
      return p_out(p->chan, project(sig, p->payload, sd), project_process(sig, p->cont, sd));
    case proc_kind::let_:
      return p_let(p->var, project(sig, p->payload, sd), project_process(sig, p->cont, sd),
                   project_process(sig, p->alt, sd));
    case proc_kind::parallel:
      return p_par(project_process(sig, p->cont, sd), project_process(sig, p->alt, sd));
    case proc_kind::new_:
      return p_new(p->name_id, project_process(sig, p->cont, sd));
    case proc_kind::repl:
      return p_repl(project_process(sig, p->cont, sd));
    case proc_kind::phase:
      return p_phase(p->phase, project_process(sig, p->cont, sd));
    default:
      return p;
  }
}

bool process_has_choice(const process& p) { return p && p->has_choice; }

// -- channels ----------------------------------------------------------------

namespace {
struct chan_state {
  std::mutex mu;
  std::vector<std::string> display;
  std::unordered_map<std::string, int> index;
};
chan_state& cstate() {
  static chan_state s;
  return s;
}
}  // namespace

int channels::intern(const std::string& name) {
  auto& s = cstate();
  std::lock_guard<std::mutex> g(s.mu);
  auto it = s.index.find(name);
  if (it != s.index.end()) return it->second;
  int id = static_cast<int>(s.display.size());
  s.display.push_back(name);
  s.index[name] = id;
  return id;
}

const std::string& channels::display(int id) {
  auto& s = cstate();
  std::lock_guard<std::mutex> g(s.mu);
  return s.display.at(static_cast<size_t>(id));
}

// -- annotations, actions, traces ---------------------------------------------

std::string annotation::str() const {
  switch (k) {
    case kind::none: return "-";
    case kind::voter: return "[" + id + "," + vote + "]";
    case kind::session: return role + "#" + std::to_string(serial);
  }
  return "?";
}

trace obs(const trace& tr) {
  trace out;
  for (const auto& a : tr)
    if (a.observable()) out.push_back(a);
  return out;
}

bool same_observable(const action& a, const action& b) {
  if (a.k != b.k) return false;
  switch (a.k) {
    case action::kind::in:
      return a.chan == b.chan && equal(a.recipe, b.recipe);
    case action::kind::out:
      return a.chan == b.chan && a.handle == b.handle;
    case action::kind::phase_jump:
      return a.target == b.target;
    default:
      return true;
  }
}

std::string to_string(const signature& sig, const action& a, bool with_annotation) {
  std::string s;
  switch (a.k) {
    case action::kind::in:
      s = "in(" + channels::display(a.chan) + "," + to_string(sig, a.recipe) + ")";
      break;
    case action::kind::out:
      s = "out(" + channels::display(a.chan) + "," +
          (a.handle >= 0 ? atoms::display(term_kind::handle, a.handle) : std::string("w?")) +
          ")";
      break;
    case action::kind::phase_jump:
      s = "phase(" + std::to_string(a.target) + ")";
      break;
    case action::kind::tau: s = "tau"; break;
    case action::kind::tau_then: s = "tau_then"; break;
    case action::kind::tau_else: s = "tau_else"; break;
  }
  if (with_annotation && a.who.k != annotation::kind::none) s += "@" + a.who.str();
  return s;
}

std::string to_string(const signature& sig, const trace& tr, bool with_annotations) {
  std::string s;
  for (size_t i = 0; i < tr.size(); ++i) {
    if (i) s += ".";
    s += to_string(sig, tr[i], with_annotations);
  }
  return s;
}

// -- configurations ----------------------------------------------------------

bool config::plain() const {
  if (!(fl == fr)) return false;
  for (const auto& ap : procs)
    if (ap.p->has_choice) return false;
  return true;
}

void config::push(process p, annotation ann, int repl_budget) {
  if (!p || p->kind == proc_kind::null) return;
  if (p->kind != proc_kind::phase)
    throw std::invalid_argument("configuration processes must be phase-guarded");
  if (p->cont->kind == proc_kind::null) return;
  procs.push_back({std::move(p), std::move(ann), repl_budget});
}

int config::fresh_handle() {
  for (;;) {
    std::string h = "w" + std::to_string(next_handle++);
    int id = atoms::handle(h);
    if (!fl.lookup(id)) return id;
  }
}

namespace {

bool fresh_name_atom(int name_id) {
  return atoms::display(term_kind::name, name_id).find('#') != std::string::npos;
}

}  // namespace

void canonical_term_key(const signature& sig, const term& t, std::map<int, int>& rename,
                        std::string& out) {
  switch (t->kind) {
    case term_kind::name: {
      if (fresh_name_atom(t->id)) {
        auto it = rename.find(t->id);
        if (it == rename.end()) it = rename.emplace(t->id, static_cast<int>(rename.size())).first;
        out += "n$" + std::to_string(it->second);
      } else {
        out += atoms::display(term_kind::name, t->id);
      }
      return;
    }
    case term_kind::var: out += "v:" + atoms::display(term_kind::var, t->id); return;
    case term_kind::handle: out += atoms::display(term_kind::handle, t->id); return;
    case term_kind::xvar: out += "?" + atoms::display(term_kind::xvar, t->id); return;
    case term_kind::choice:
      out += "ch[";
      canonical_term_key(sig, t->args[0], rename, out);
      out += ",";
      canonical_term_key(sig, t->args[1], rename, out);
      out += "]";
      return;
    case term_kind::app: {
      out += sig.at(t->id).name;
      if (t->args.empty()) return;
      out += "(";
      for (size_t i = 0; i < t->args.size(); ++i) {
        if (i) out += ",";
        canonical_term_key(sig, t->args[i], rename, out);
      }
      out += ")";
      return;
    }
  }
}

namespace {

void key_process(const signature& sig, const process& p, std::map<int, int>& rename,
                 std::string& out) {
  if (!p) return;
  out += std::to_string(static_cast<int>(p->kind)) + "/";
  switch (p->kind) {
    case proc_kind::input:
      out += channels::display(p->chan) + "," + std::to_string(p->var) + ";";
      key_process(sig, p->cont, rename, out);
      return;
    case proc_kind::output:
      out += channels::display(p->chan) + ",";
      canonical_term_key(sig, p->payload, rename, out);
      out += ";";
      key_process(sig, p->cont, rename, out);
      return;
    case proc_kind::let_:
      out += std::to_string(p->var) + ",";
      canonical_term_key(sig, p->payload, rename, out);
      out += ";";
      key_process(sig, p->cont, rename, out);
      out += "|";
      key_process(sig, p->alt, rename, out);
      return;
    case proc_kind::parallel:
      key_process(sig, p->cont, rename, out);
      out += "|";
      key_process(sig, p->alt, rename, out);
      return;
    case proc_kind::new_:
      out += std::to_string(p->name_id) + ";";
      key_process(sig, p->cont, rename, out);
      return;
    case proc_kind::repl:
      key_process(sig, p->cont, rename, out);
      return;
    case proc_kind::phase:
      out += std::to_string(p->phase) + ";";
      key_process(sig, p->cont, rename, out);
      return;
    default:
      return;
  }
}

}  // namespace

void config_key_into(const signature& sig, const config& k, std::map<int, int>& rename,
                     std::string& out) {
  // Sort processes by a pre-key that ignores fresh-name identity, then build
  // the final key renaming fresh names in traversal order.
  std::vector<std::pair<std::string, const aproc*>> items;
  items.reserve(k.procs.size());
  for (const auto& ap : k.procs) {
    std::map<int, int> scratch;
    std::string pre;
    key_process(sig, ap.p, scratch, pre);
    pre += "@" + ap.ann.str() + "$" + std::to_string(ap.repl_budget);
    items.emplace_back(std::move(pre), &ap);
  }
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  out += "ph" + std::to_string(k.phase) + "|";
  for (const auto& [pre, ap] : items) {
    key_process(sig, ap->p, rename, out);
    out += "@" + ap->ann.str() + "$" + std::to_string(ap->repl_budget) + "||";
  }
  out += "L:";
  for (const auto& e : k.fl.entries()) {
    out += atoms::display(term_kind::handle, e.handle) + "=";
    canonical_term_key(sig, e.value, rename, out);
    out += ";";
  }
  out += "R:";
  for (const auto& e : k.fr.entries()) {
    out += atoms::display(term_kind::handle, e.handle) + "=";
    canonical_term_key(sig, e.value, rename, out);
    out += ";";
  }
}

std::string config::key(const signature& sig) const {
  std::map<int, int> rename;
  std::string out;
  config_key_into(sig, *this, rename, out);
  return out;
}

std::string frame_pair_key(const signature& sig, const frame& fl, const frame& fr) {
  std::map<int, int> rename;
  std::string out = "L:";
  for (const auto& e : fl.entries()) {
    out += atoms::display(term_kind::handle, e.handle) + "=";
    canonical_term_key(sig, e.value, rename, out);
    out += ";";
  }
  out += "R:";
  for (const auto& e : fr.entries()) {
    out += atoms::display(term_kind::handle, e.handle) + "=";
    canonical_term_key(sig, e.value, rename, out);
    out += ";";
  }
  return out;
}

config project_config(const signature& sig, const config& k, side sd) {
  config out;
  out.phase = k.phase;
  out.next_handle = k.next_handle;
  out.next_serial = k.next_serial;
  out.fl = sd == side::left ? k.fl : k.fr;
  out.fr = out.fl;
  for (const auto& ap : k.procs)
    out.procs.push_back({project_process(sig, ap.p, sd), ap.ann, ap.repl_budget});
  return out;
}

}  // namespace evsec
