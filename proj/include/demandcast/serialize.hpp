#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "demandcast/features.hpp"
#include "demandcast/gbt.hpp"
#include "demandcast/ingest.hpp"
#include "demandcast/seasonal.hpp"

namespace demandcast {

inline constexpr int kBundleFormatVersion = 1;

/// Everything `predict` needs: the run settings, fitted encoders and the fitted regressor.
/// ES runs carry no regressor.
struct ModelBundle {
  RunConfig config;
  FeatureEncoder encoder;
  std::optional<SeasonalityModel> seasonality;
  std::optional<BoostedModel> boosted;
  std::optional<ForestModel> forest;
};

/// JSON text; doubles are written in shortest round-trip form so reloading is exact.
std::string to_json(const ModelBundle& bundle);
/// Throws DataError on malformed input or an unknown format version.
ModelBundle bundle_from_json(std::string_view text);

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace demandcast
