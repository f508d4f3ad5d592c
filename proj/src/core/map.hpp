#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/jsonio.hpp"

namespace peril {

enum class LinkKind : uint8_t { Land, Water };

struct Region {
  std::string id;
  std::string name;
  int zone = -1;  // index into MapGraph::zones
};

struct Zone {
  std::string id;
  std::string name;
  int64_t bonus = 0;
  std::vector<int> members;  // region indices, ascending
};

// Immutable world graph. Regions and zones live in dense index space after
// loading; every lookup the game engine performs per decision is a vector
// index. Adjacency is undirected: both (a,b) and (b,a) appear in neighbor
// lists, each link tagged land or water.
class MapGraph {
 public:
  // Parses and validates. All validation failures are Error{Validation} and
  // name the offending region/zone ids. `origin` labels error messages
  // (usually the file path).
  static MapGraph from_json(const Json& doc, const std::string& origin);
  static MapGraph load(const std::string& path);

  Json to_json() const;

  const std::string& name() const { return name_; }
  int region_count() const { return static_cast<int>(regions_.size()); }
  int zone_count() const { return static_cast<int>(zones_.size()); }
  const Region& region(int r) const { return regions_[static_cast<size_t>(r)]; }
  const Zone& zone(int z) const { return zones_[static_cast<size_t>(z)]; }

  // -1 when the id is unknown.
  int region_index(const std::string& id) const;
  int zone_index(const std::string& id) const;

  const std::vector<int>& neighbors(int r) const {
    return neighbors_[static_cast<size_t>(r)];
  }
  bool adjacent(int a, int b) const;
  // Requires adjacency; Error{Logic} otherwise.
  LinkKind link_kind(int a, int b) const;

  // True when the region has a neighbor in a different zone.
  bool on_zone_boundary(int r) const { return boundary_[static_cast<size_t>(r)]; }
  // Zones bordering r from the outside (r not in them), ascending, excludes r's own zone.
  const std::vector<int>& adjacent_zones(int r) const {
    return adjacent_zones_[static_cast<size_t>(r)];
  }
  // Zone indices ordered by (member count desc, zone id asc); front() is the
  // "largest zone" the deploy heuristics talk about.
  const std::vector<int>& zones_by_size() const { return zones_by_size_; }

 private:
  std::string name_;
  std::vector<Region> regions_;
  std::vector<Zone> zones_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<LinkKind>> neighbor_kinds_;  // parallel to neighbors_
  std::vector<bool> boundary_;
  std::vector<std::vector<int>> adjacent_zones_;
  std::vector<int> zones_by_size_;
};

}  // namespace peril
