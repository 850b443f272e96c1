#pragma once

#include "clearn/learn/regressor.hpp"

#include <iosfwd>

namespace clearn::learn {

// Plain-text model format, whitespace separated, doubles at full precision:
//
//   clearn-regressor 1 <kind>
//   scaler <minmax|standardize> <dim> <offsets...> <scales...>     (input)
//   scaler <minmax|standardize> 1 <offset> <scale>                  (target)
//   linear <d> <coef...> <intercept>
//   ensemble <tree count> <base> <learning rate>
//   tree <node count>
//   <feature> <threshold> <left> <right> <value>                    (preorder)
//   mlp <layer count> <width_0> ... <width_L>
//   <weights row-major> <bias>                                      (per layer)
//   end
void write_regressor(const TrainedRegressor& model, std::ostream& out);

/// Throws ParseError on malformed input.
TrainedRegressor read_regressor(std::istream& in);

}  // namespace clearn::learn
