#pragma once

#include "lookahead/beam.hpp"
#include "lookahead/dfs_lookahead.hpp"
#include "lookahead/greedy.hpp"
#include "lookahead/rollout.hpp"
