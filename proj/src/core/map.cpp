#include "core/map.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "core/error.hpp"

namespace peril {

namespace {

[[noreturn]] void bad_map(const std::string& origin, const std::string& what) {
  fail(ErrorKind::Validation, "invalid map (" + origin + "): " + what);
}

std::string require_string(const Json& obj, const char* key,
                           const std::string& origin, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key) || !obj[key].is_string()) {
    bad_map(origin, where + " needs string field '" + key + "'");
  }
  return obj[key].get<std::string>();
}

}  // namespace

MapGraph MapGraph::from_json(const Json& doc, const std::string& origin) {
  MapGraph m;
  if (!doc.is_object()) bad_map(origin, "top level must be an object");
  m.name_ = doc.value("name", std::string("unnamed"));

  if (!doc.contains("zones") || !doc["zones"].is_array() || doc["zones"].empty()) {
    bad_map(origin, "needs a non-empty 'zones' array");
  }
  if (!doc.contains("regions") || !doc["regions"].is_array() || doc["regions"].empty()) {
    bad_map(origin, "needs a non-empty 'regions' array");
  }
  if (!doc.contains("adjacency") || !doc["adjacency"].is_array()) {
    bad_map(origin, "needs an 'adjacency' array");
  }

  std::map<std::string, int> zone_ix;
  for (const Json& zj : doc["zones"]) {
    Zone z;
    z.id = require_string(zj, "id", origin, "zone");
    z.name = zj.value("name", z.id);
    if (!zj.contains("bonus") || !zj["bonus"].is_number()) {
      bad_map(origin, "zone '" + z.id + "' needs numeric 'bonus'");
    }
    z.bonus = zj["bonus"].get<int64_t>();
    if (z.bonus < 0) bad_map(origin, "zone '" + z.id + "' has negative bonus");
    if (zone_ix.count(z.id)) bad_map(origin, "duplicate zone id '" + z.id + "'");
    zone_ix[z.id] = static_cast<int>(m.zones_.size());
    m.zones_.push_back(std::move(z));
  }

  std::map<std::string, int> region_ix;
  for (const Json& rj : doc["regions"]) {
    Region r;
    r.id = require_string(rj, "id", origin, "region");
    r.name = rj.value("name", r.id);
    std::string zid = require_string(rj, "zone", origin, "region '" + r.id + "'");
    auto zit = zone_ix.find(zid);
    if (zit == zone_ix.end()) {
      bad_map(origin, "region '" + r.id + "' names unknown zone '" + zid + "'");
    }
    r.zone = zit->second;
    if (region_ix.count(r.id)) bad_map(origin, "duplicate region id '" + r.id + "'");
    int rix = static_cast<int>(m.regions_.size());
    region_ix[r.id] = rix;
    m.regions_.push_back(std::move(r));
    m.zones_[static_cast<size_t>(zit->second)].members.push_back(rix);
  }

  // Optional zone member lists cross-check region.zone claims; a region named
  // by two zones or by a zone it does not claim is a membership conflict.
  for (const Json& zj : doc["zones"]) {
    if (!zj.contains("regions")) continue;
    if (!zj["regions"].is_array()) {
      bad_map(origin, "zone '" + zj["id"].get<std::string>() + "' member list must be an array");
    }
    std::string zid = zj["id"].get<std::string>();
    int zix = zone_ix[zid];
    std::set<int> listed;
    for (const Json& rid_j : zj["regions"]) {
      if (!rid_j.is_string()) bad_map(origin, "zone '" + zid + "' member list holds a non-string");
      std::string rid = rid_j.get<std::string>();
      auto rit = region_ix.find(rid);
      if (rit == region_ix.end()) {
        bad_map(origin, "zone '" + zid + "' lists unknown region '" + rid + "'");
      }
      if (m.regions_[static_cast<size_t>(rit->second)].zone != zix) {
        bad_map(origin, "region '" + rid + "' assigned to multiple zones ('" +
                            m.zones_[static_cast<size_t>(m.regions_[static_cast<size_t>(rit->second)].zone)].id +
                            "' and '" + zid + "')");
      }
      if (!listed.insert(rit->second).second) {
        bad_map(origin, "zone '" + zid + "' lists region '" + rid + "' twice");
      }
    }
    if (listed.size() != m.zones_[static_cast<size_t>(zix)].members.size()) {
      bad_map(origin, "zone '" + zid + "' member list disagrees with region zone fields");
    }
  }

  for (const Zone& z : m.zones_) {
    if (z.members.empty()) bad_map(origin, "zone '" + z.id + "' has no member regions");
  }

  const size_t n = m.regions_.size();
  m.neighbors_.assign(n, {});
  m.neighbor_kinds_.assign(n, {});
  std::set<std::pair<int, int>> seen;
  for (const Json& link : doc["adjacency"]) {
    if (!link.is_array() || link.size() != 3 || !link[0].is_string() ||
        !link[1].is_string() || !link[2].is_string()) {
      bad_map(origin, "adjacency entries must be [region, region, \"land\"|\"water\"]");
    }
    std::string aid = link[0].get<std::string>();
    std::string bid = link[1].get<std::string>();
    std::string kind_s = link[2].get<std::string>();
    auto ait = region_ix.find(aid);
    auto bit = region_ix.find(bid);
    if (ait == region_ix.end()) bad_map(origin, "adjacency names unknown region '" + aid + "'");
    if (bit == region_ix.end()) bad_map(origin, "adjacency names unknown region '" + bid + "'");
    int a = ait->second, b = bit->second;
    if (a == b) bad_map(origin, "region '" + aid + "' linked to itself");
    LinkKind kind;
    if (kind_s == "land") kind = LinkKind::Land;
    else if (kind_s == "water") kind = LinkKind::Water;
    else bad_map(origin, "link " + aid + "-" + bid + " has unknown kind '" + kind_s + "'");
    auto key = std::minmax(a, b);
    if (!seen.insert({key.first, key.second}).second) {
      bad_map(origin, "duplicate link between '" + aid + "' and '" + bid + "'");
    }
    m.neighbors_[static_cast<size_t>(a)].push_back(b);
    m.neighbor_kinds_[static_cast<size_t>(a)].push_back(kind);
    m.neighbors_[static_cast<size_t>(b)].push_back(a);
    m.neighbor_kinds_[static_cast<size_t>(b)].push_back(kind);
  }

  // Neighbor lists sorted by region index so iteration order is a property of
  // the map, not of the file's link order.
  for (size_t r = 0; r < n; ++r) {
    std::vector<size_t> order(m.neighbors_[r].size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
      return m.neighbors_[r][x] < m.neighbors_[r][y];
    });
    std::vector<int> ns;
    std::vector<LinkKind> ks;
    ns.reserve(order.size());
    ks.reserve(order.size());
    for (size_t i : order) {
      ns.push_back(m.neighbors_[r][i]);
      ks.push_back(m.neighbor_kinds_[r][i]);
    }
    m.neighbors_[r] = std::move(ns);
    m.neighbor_kinds_[r] = std::move(ks);
  }

  for (size_t r = 0; r < n; ++r) {
    if (m.neighbors_[r].empty()) {
      bad_map(origin, "region '" + m.regions_[r].id + "' has no links");
    }
  }

  // Connectivity over the full link set (land and water both carry movement).
  std::vector<bool> reached(n, false);
  std::vector<int> stack{0};
  reached[0] = true;
  while (!stack.empty()) {
    int r = stack.back();
    stack.pop_back();
    for (int nb : m.neighbors_[static_cast<size_t>(r)]) {
      if (!reached[static_cast<size_t>(nb)]) {
        reached[static_cast<size_t>(nb)] = true;
        stack.push_back(nb);
      }
    }
  }
  for (size_t r = 0; r < n; ++r) {
    if (!reached[r]) {
      bad_map(origin, "map is disconnected; region '" + m.regions_[r].id +
                          "' unreachable from '" + m.regions_[0].id + "'");
    }
  }

  m.boundary_.assign(n, false);
  m.adjacent_zones_.assign(n, {});
  for (size_t r = 0; r < n; ++r) {
    std::set<int> other_zones;
    for (int nb : m.neighbors_[r]) {
      int z = m.regions_[static_cast<size_t>(nb)].zone;
      if (z != m.regions_[r].zone) other_zones.insert(z);
    }
    m.boundary_[r] = !other_zones.empty();
    m.adjacent_zones_[r].assign(other_zones.begin(), other_zones.end());
  }

  m.zones_by_size_.resize(m.zones_.size());
  for (size_t z = 0; z < m.zones_.size(); ++z) m.zones_by_size_[z] = static_cast<int>(z);
  std::sort(m.zones_by_size_.begin(), m.zones_by_size_.end(), [&](int x, int y) {
    size_t sx = m.zones_[static_cast<size_t>(x)].members.size();
    size_t sy = m.zones_[static_cast<size_t>(y)].members.size();
    if (sx != sy) return sx > sy;
    return x < y;
  });

  return m;
}

MapGraph MapGraph::load(const std::string& path) {
  return from_json(read_json_file(path), path);
}

Json MapGraph::to_json() const {
  Json doc;
  doc["name"] = name_;
  Json zones = Json::array();
  for (const Zone& z : zones_) {
    Json zj{{"id", z.id}, {"name", z.name}, {"bonus", z.bonus}};
    Json members = Json::array();
    for (int r : z.members) members.push_back(regions_[static_cast<size_t>(r)].id);
    zj["regions"] = members;
    zones.push_back(std::move(zj));
  }
  doc["zones"] = zones;
  Json regions = Json::array();
  for (const Region& r : regions_) {
    regions.push_back(Json{{"id", r.id},
                           {"name", r.name},
                           {"zone", zones_[static_cast<size_t>(r.zone)].id}});
  }
  doc["regions"] = regions;
  Json links = Json::array();
  for (size_t a = 0; a < neighbors_.size(); ++a) {
    for (size_t i = 0; i < neighbors_[a].size(); ++i) {
      int b = neighbors_[a][i];
      if (static_cast<int>(a) < b) {
        links.push_back(Json::array(
            {regions_[a].id, regions_[static_cast<size_t>(b)].id,
             neighbor_kinds_[a][i] == LinkKind::Land ? "land" : "water"}));
      }
    }
  }
  doc["adjacency"] = links;
  return doc;
}

int MapGraph::region_index(const std::string& id) const {
  for (size_t i = 0; i < regions_.size(); ++i) {
    if (regions_[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

int MapGraph::zone_index(const std::string& id) const {
  for (size_t i = 0; i < zones_.size(); ++i) {
    if (zones_[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

bool MapGraph::adjacent(int a, int b) const {
  const std::vector<int>& ns = neighbors_[static_cast<size_t>(a)];
  return std::binary_search(ns.begin(), ns.end(), b);
}

LinkKind MapGraph::link_kind(int a, int b) const {
  const std::vector<int>& ns = neighbors_[static_cast<size_t>(a)];
  auto it = std::lower_bound(ns.begin(), ns.end(), b);
  if (it == ns.end() || *it != b) {
    fail(ErrorKind::Logic, "link_kind on non-adjacent regions '" +
                               regions_[static_cast<size_t>(a)].id + "', '" +
                               regions_[static_cast<size_t>(b)].id + "'");
  }
  return neighbor_kinds_[static_cast<size_t>(a)][static_cast<size_t>(it - ns.begin())];
}

}  // namespace peril
