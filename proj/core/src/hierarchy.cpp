#include "cbkb/hierarchy.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "cbkb/error.hpp"

namespace cbkb {

const char* to_string(LinkKind k) {
  switch (k) {
    case LinkKind::subtype: return "subtype";
    case LinkKind::instance: return "instance";
    case LinkKind::logical_deduction_of: return "logical-deduction-of";
    case LinkKind::informal_generalization: return "informal-generalization";
    case LinkKind::subprocess: return "subprocess";
    case LinkKind::equivalence: return "equivalence";
    case LinkKind::example: return "example";
    case LinkKind::corrective: return "corrective";
    case LinkKind::argumentation: return "argumentation";
  }
  return "?";
}

std::optional<LinkKind> link_kind_from_string(std::string_view s) {
  for (LinkKind k : {LinkKind::subtype, LinkKind::instance, LinkKind::logical_deduction_of,
                     LinkKind::informal_generalization, LinkKind::subprocess,
                     LinkKind::equivalence, LinkKind::example, LinkKind::corrective,
                     LinkKind::argumentation}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

bool is_strict(LinkKind k) {
  return k != LinkKind::equivalence && k != LinkKind::corrective &&
         k != LinkKind::argumentation;
}

namespace {

bool is_term_specialization(LinkKind k) {
  return k == LinkKind::subtype || k == LinkKind::instance ||
         k == LinkKind::equivalence || k == LinkKind::informal_generalization;
}

bool is_downward_display(LinkKind k) {
  return k == LinkKind::subtype || k == LinkKind::instance ||
         k == LinkKind::logical_deduction_of || k == LinkKind::informal_generalization ||
         k == LinkKind::subprocess || k == LinkKind::example;
}

}  // namespace

Hierarchy::Hierarchy() : cache_(std::make_shared<Cache>()) {
  add_object(kRoot, ObjectKind::term, std::nullopt);
}

Hierarchy::Hierarchy(const Hierarchy& o)
    : objects_(o.objects_),
      names_(o.names_),
      links_(o.links_),
      up_(o.up_),
      down_(o.down_),
      cache_(o.cache_) {}

Hierarchy& Hierarchy::operator=(const Hierarchy& o) {
  if (this != &o) {
    objects_ = o.objects_;
    names_ = o.names_;
    links_ = o.links_;
    up_ = o.up_;
    down_ = o.down_;
    cache_ = o.cache_;
  }
  return *this;
}

void Hierarchy::add_object(const std::string& id, ObjectKind kind,
                           std::optional<std::string> name) {
  objects_[id] = kind;
  if (kind == ObjectKind::term && name) names_[*name].insert(id);
  invalidate();
}

bool Hierarchy::is_statement(const std::string& id) const {
  auto it = objects_.find(id);
  return it != objects_.end() && it->second == ObjectKind::statement;
}

void Hierarchy::add_term(const Term& term, const std::vector<HierarchyLink>& anchors) {
  if (anchors.empty()) {
    throw Error(ErrorCode::no_anchor, "no-anchor: " + term.id +
                                          " must specialize an existing term");
  }
  for (const HierarchyLink& a : anchors) {
    bool allowed = a.kind == LinkKind::subtype || a.kind == LinkKind::instance ||
                   a.kind == LinkKind::equivalence ||
                   a.kind == LinkKind::informal_generalization ||
                   a.kind == LinkKind::subprocess;
    if (!allowed || (a.from != term.id && a.to != term.id)) {
      throw Error(ErrorCode::no_anchor, "no-anchor: invalid anchor for " + term.id);
    }
    const std::string& other = a.from == term.id ? a.to : a.from;
    if (!contains(other)) throw Error(ErrorCode::unknown_object, "unknown-object: " + other);
  }
  Hierarchy work = *this;
  std::optional<std::string> name;
  if (term.formality == Formality::formal) name = Identifier::parse(term.id).name;
  work.add_object(term.id, ObjectKind::term, name);
  for (const std::string& n : term.names) {
    if (term.formality == Formality::formal) work.names_[n].insert(term.id);
  }
  for (const HierarchyLink& a : anchors) work.add_link(a);
  *this = std::move(work);
}

void Hierarchy::add_link(const HierarchyLink& link) {
  for (const std::string* end : {&link.from, &link.to}) {
    if (!contains(*end)) throw Error(ErrorCode::unknown_object, "unknown-object: " + *end);
  }
  if (is_strict(link.kind) && (link.from == link.to || strict_reaches(link.to, link.from))) {
    throw Error(ErrorCode::cycle_introduced,
                "cycle-introduced: " + link.from + " -> " + link.to);
  }
  if (!links_.insert(link).second) return;
  up_[link.from].push_back(link);
  down_[link.to].push_back(link);
  invalidate();
}

void Hierarchy::remove_link(const HierarchyLink& link) {
  if (links_.erase(link)) rebuild_index();
}

void Hierarchy::remove_object(const std::string& id) {
  objects_.erase(id);
  for (auto& [name, ids] : names_) ids.erase(id);
  std::erase_if(links_, [&](const HierarchyLink& l) { return l.from == id || l.to == id; });
  rebuild_index();
}

void Hierarchy::rename_object(const std::string& from, const std::string& to,
                              std::optional<std::string> new_name) {
  auto it = objects_.find(from);
  if (it == objects_.end()) throw Error(ErrorCode::unknown_object, "unknown-object: " + from);
  ObjectKind kind = it->second;
  objects_.erase(it);
  objects_[to] = kind;
  for (auto& [name, ids] : names_) {
    if (ids.erase(from)) ids.insert(to);
  }
  if (new_name) names_[*new_name].insert(to);
  std::set<HierarchyLink> renamed;
  for (HierarchyLink l : links_) {
    if (l.from == from) l.from = to;
    if (l.to == from) l.to = to;
    renamed.insert(std::move(l));
  }
  links_ = std::move(renamed);
  rebuild_index();
}

void Hierarchy::rebuild_index() {
  up_.clear();
  down_.clear();
  for (const HierarchyLink& l : links_) {
    up_[l.from].push_back(l);
    down_[l.to].push_back(l);
  }
  invalidate();
}

std::vector<HierarchyLink> Hierarchy::links_from(const std::string& id) const {
  auto it = up_.find(id);
  return it == up_.end() ? std::vector<HierarchyLink>{} : it->second;
}

std::vector<HierarchyLink> Hierarchy::links_to(const std::string& id) const {
  auto it = down_.find(id);
  return it == down_.end() ? std::vector<HierarchyLink>{} : it->second;
}

const std::set<std::string>& Hierarchy::ancestors_locked(Cache& c,
                                                         const std::string& id) const {
  auto it = c.ancestors.find(id);
  if (it != c.ancestors.end()) return it->second;
  std::set<std::string> seen{id};
  std::deque<std::string> queue{id};
  while (!queue.empty()) {
    std::string cur = std::move(queue.front());
    queue.pop_front();
    auto visit = [&](const std::string& next) {
      if (seen.insert(next).second) queue.push_back(next);
    };
    if (auto u = up_.find(cur); u != up_.end()) {
      for (const HierarchyLink& l : u->second) {
        if (is_term_specialization(l.kind)) visit(l.to);
      }
    }
    if (auto d = down_.find(cur); d != down_.end()) {
      for (const HierarchyLink& l : d->second) {
        if (l.kind == LinkKind::equivalence) visit(l.from);
      }
    }
  }
  return c.ancestors.emplace(id, std::move(seen)).first->second;
}

bool Hierarchy::reaches(std::string_view specific, std::string_view general) const {
  if (specific == general) return true;
  std::lock_guard lock(cache_->mutex);
  return ancestors_locked(*cache_, std::string(specific)).contains(std::string(general));
}

std::vector<std::string> Hierarchy::formal_terms_named(std::string_view name) const {
  auto it = names_.find(std::string(name));
  if (it == names_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

bool Hierarchy::is_formal(std::string_view term) const {
  if (term.find('#') != std::string_view::npos) return true;
  auto it = objects_.find(std::string(term));
  return it != objects_.end() && it->second == ObjectKind::term;
}

bool Hierarchy::strict_reaches(const std::string& from, const std::string& to) const {
  if (from == to) return true;
  std::set<std::string> seen{from};
  std::deque<std::string> queue{from};
  while (!queue.empty()) {
    std::string cur = std::move(queue.front());
    queue.pop_front();
    auto u = up_.find(cur);
    if (u == up_.end()) continue;
    for (const HierarchyLink& l : u->second) {
      if (!is_strict(l.kind)) continue;
      if (l.to == to) return true;
      if (seen.insert(l.to).second) queue.push_back(l.to);
    }
  }
  return false;
}

bool Hierarchy::is_acyclic() const {
  std::map<std::string, int> state;  // 1 = on stack, 2 = done
  std::function<bool(const std::string&)> dfs = [&](const std::string& id) {
    state[id] = 1;
    if (auto u = up_.find(id); u != up_.end()) {
      for (const HierarchyLink& l : u->second) {
        if (!is_strict(l.kind)) continue;
        int s = state[l.to];
        if (s == 1) return false;
        if (s == 0 && !dfs(l.to)) return false;
      }
    }
    state[id] = 2;
    return true;
  };
  for (const auto& [id, kind] : objects_) {
    if (state[id] == 0 && !dfs(id)) return false;
  }
  return true;
}

std::vector<std::string> Hierarchy::unanchored() const {
  std::set<std::string> reached{kRoot};
  std::deque<std::string> queue{kRoot};
  while (!queue.empty()) {
    std::string cur = std::move(queue.front());
    queue.pop_front();
    auto d = down_.find(cur);
    if (d == down_.end()) continue;
    for (const HierarchyLink& l : d->second) {
      if (!is_strict(l.kind) && l.kind != LinkKind::equivalence) continue;
      if (reached.insert(l.from).second) queue.push_back(l.from);
    }
    if (auto u = up_.find(cur); u != up_.end()) {
      for (const HierarchyLink& l : u->second) {
        if (l.kind == LinkKind::equivalence && reached.insert(l.to).second) {
          queue.push_back(l.to);
        }
      }
    }
  }
  std::vector<std::string> out;
  for (const auto& [id, kind] : objects_) {
    if (!reached.contains(id)) out.push_back(id);
  }
  return out;
}

TreeNode Hierarchy::specializations_of(const std::string& root, std::size_t max_depth) const {
  if (!contains(root)) throw Error(ErrorCode::unknown_object, "unknown-object: " + root);
  TreeNode tree;
  tree.id = root;
  std::set<std::string> seen{root};
  // Breadth-first so that each object appears once, at its shallowest depth.
  std::deque<std::pair<TreeNode*, std::size_t>> queue{{&tree, 0}};
  std::deque<TreeNode*> owners;
  while (!queue.empty()) {
    auto [node, depth] = queue.front();
    queue.pop_front();
    if (depth >= max_depth) continue;
    auto d = down_.find(node->id);
    if (d == down_.end()) continue;
    std::vector<HierarchyLink> kids;
    for (const HierarchyLink& l : d->second) {
      if (is_downward_display(l.kind)) kids.push_back(l);
    }
    std::sort(kids.begin(), kids.end());
    std::vector<HierarchyLink> fresh;
    for (const HierarchyLink& l : kids) {
      if (seen.insert(l.from).second) fresh.push_back(l);
    }
    node->children.reserve(fresh.size());
    for (const HierarchyLink& l : fresh) {
      node->children.push_back(TreeNode{l.from, to_string(l.kind), l.creator, {}});
    }
    for (TreeNode& c : node->children) queue.emplace_back(&c, depth + 1);
  }
  return tree;
}

std::set<std::string> Hierarchy::statement_component(const std::string& id,
                                                     bool include_system) const {
  std::set<std::string> seen{id};
  std::deque<std::string> queue{id};
  while (!queue.empty()) {
    std::string cur = std::move(queue.front());
    queue.pop_front();
    auto visit = [&](const HierarchyLink& l, const std::string& other) {
      if (!is_statement(other) || (l.system && !include_system)) return;
      if (seen.insert(other).second) queue.push_back(other);
    };
    if (auto u = up_.find(cur); u != up_.end()) {
      for (const HierarchyLink& l : u->second) visit(l, l.to);
    }
    if (auto d = down_.find(cur); d != down_.end()) {
      for (const HierarchyLink& l : d->second) visit(l, l.from);
    }
  }
  return seen;
}

bool Hierarchy::explicitly_related(const std::string& a, const std::string& b,
                                   bool include_system) const {
  for (const std::string* id : {&a, &b}) {
    if (!contains(*id)) throw Error(ErrorCode::unknown_object, "unknown-object: " + *id);
  }
  if (a == b) return true;
  return statement_component(a, include_system).contains(b);
}

}  // namespace cbkb
