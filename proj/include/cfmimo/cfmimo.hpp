#pragma once

// Uplink cell-free massive MIMO under line-of-sight propagation.

#include "cfmimo/common.hpp"
#include "cfmimo/scenario.hpp"
#include "cfmimo/channel.hpp"
#include "cfmimo/training.hpp"
#include "cfmimo/estimation.hpp"
#include "cfmimo/association.hpp"
#include "cfmimo/moments.hpp"
#include "cfmimo/combining.hpp"
#include "cfmimo/performance.hpp"
#include "cfmimo/campaign.hpp"
#include "cfmimo/io.hpp"
