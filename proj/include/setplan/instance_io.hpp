#pragma once

#include <string>
#include <vector>

#include "setplan/core.hpp"

namespace setplan::core {

// Instance files are UTF-8 JSON lines. First line is a header record:
//   {"record":"header","version":1,"kind":"instance","gallery_size":N,
//    "ground_truth":[...],"query_text":"...","caption":"..."}
// followed by one record per atomic retrieval:
//   {"record":"retrieval","id":N,"tool":"...","query":"...",
//    "polarity":"positive"|"negative","k":N,"results":[ordered ids]}
std::string serialize_instance(const Instance& instance);
Instance parse_instance(const std::string& text);

void save_instance(const Instance& instance, const std::string& path);
Instance load_instance(const std::string& path);

// Loads every *.jsonl instance in `path` (file or directory), sorted by
// file name for deterministic ordering.
std::vector<std::string> list_instance_files(const std::string& path);
std::vector<Instance> load_instances(const std::string& path);

}  // namespace setplan::core
