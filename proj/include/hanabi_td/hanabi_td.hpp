#pragma once

#include "hanabi_td/rng.hpp"
#include "hanabi_td/engine.hpp"
#include "hanabi_td/reward.hpp"
#include "hanabi_td/codec.hpp"
#include "hanabi_td/tabular.hpp"
#include "hanabi_td/neural.hpp"
#include "hanabi_td/deep.hpp"
#include "hanabi_td/agents.hpp"
#include "hanabi_td/stats.hpp"
#include "hanabi_td/config.hpp"
#include "hanabi_td/report.hpp"
#include "hanabi_td/harness.hpp"
