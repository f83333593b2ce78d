#include "dfept/readout.hpp"

namespace dfept {

std::string_view to_string(PoolMode mode) {
  switch (mode) {
    case PoolMode::Sum: return "sum";
    case PoolMode::Max: return "max";
    case PoolMode::Mean: return "mean";
    case PoolMode::United: return "united";
  }
  return "?";
}

std::string_view to_string(PeMode mode) {
  switch (mode) {
    case PeMode::PostPool: return "post-pool";
    case PeMode::PerNode: return "per-node";
    case PeMode::Off: return "off";
  }
  return "?";
}

PoolMode parse_pool_mode(std::string_view tag) {
  if (tag == "sum") return PoolMode::Sum;
  if (tag == "max") return PoolMode::Max;
  if (tag == "mean") return PoolMode::Mean;
  if (tag == "united" || tag == "uni") return PoolMode::United;
  throw Error(ErrorKind::UnsupportedFormat, "unknown pool mode '" + std::string(tag) + "'");
}

PeMode parse_pe_mode(std::string_view tag) {
  if (tag == "post-pool" || tag == "post_pool") return PeMode::PostPool;
  if (tag == "per-node" || tag == "per_node") return PeMode::PerNode;
  if (tag == "off") return PeMode::Off;
  throw Error(ErrorKind::UnsupportedFormat, "unknown positional encoding mode '" + std::string(tag) + "'");
}

}  // namespace dfept
