#include "genport/rng.hpp"

// RngStream is header-only; this TU exists so the target has a home for
// any future out-of-line additions and keeps the build graph uniform.
namespace genport {}
