#pragma once

// Umbrella header for the stegret library: edge-adaptive semantic hiding in
// images plus keyword retrieval over the embedded semantics.

#include "stegret/edges.hpp"
#include "stegret/error.hpp"
#include "stegret/image.hpp"
#include "stegret/image_io.hpp"
#include "stegret/metrics.hpp"
#include "stegret/payload.hpp"
#include "stegret/retrieval.hpp"
#include "stegret/semantics.hpp"
#include "stegret/stego.hpp"
