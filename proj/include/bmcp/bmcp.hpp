#ifndef BMCP_BMCP_HPP
#define BMCP_BMCP_HPP

#include "bmcp/baselines.hpp"
#include "bmcp/geweke.hpp"
#include "bmcp/gibbs.hpp"
#include "bmcp/io.hpp"
#include "bmcp/normal_model.hpp"
#include "bmcp/partition.hpp"
#include "bmcp/prefix_stats.hpp"
#include "bmcp/rng.hpp"
#include "bmcp/simulate.hpp"
#include "bmcp/summary.hpp"

#endif
