#pragma once

#include <string>

#include "pem/memory.hpp"

namespace pem {

// Serializes the full memory state (variant, config, clusters with
// center digests, every stored frame) as a JSON document. Loading the
// text and saving again yields byte-identical output.
std::string save_snapshot(const EpisodicMemory& memory);

// Rebuilds a memory from snapshot text. Cluster centers are recomputed
// from member frames and checked against the stored digests; throws
// std::runtime_error on any mismatch or malformed input.
EpisodicMemory load_snapshot(const std::string& text);

}  // namespace pem
