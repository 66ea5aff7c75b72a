#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "kgbayes/mbnb.hpp"
#include "kgbayes/mixture_hbm.hpp"

namespace kgbayes {

// Versioned key/value model documents (JSON). Numbers are written with 17
// significant digits, so reloaded models reproduce posteriors exactly.
//   kind "mbnb":    {version, kind, alpha, pi, p1[], p0[], feature_names[]}
//   kind "mixture": {version, kind, K, mu[], P[][], feature_names[]}
//   kind "hbm":     {version, kind, variant, top, mixture | class_mixtures}
void save_model(const MbnbParams& m, std::ostream& out);
void save_model(const MixtureParams& m, std::ostream& out);
void save_model(const HbmModel& h, std::ostream& out);

using AnyModel = std::variant<MbnbParams, MixtureParams, HbmModel>;

AnyModel load_model(std::istream& in);
AnyModel load_model_file(const std::string& path);

void save_model_file(const AnyModel& m, const std::string& path);

}  // namespace kgbayes
