#ifndef NODEFLOW_NODEFLOW_HPP
#define NODEFLOW_NODEFLOW_HPP

#include "nodeflow/capacity.hpp"
#include "nodeflow/cutflow.hpp"
#include "nodeflow/errors.hpp"
#include "nodeflow/gf2.hpp"
#include "nodeflow/netgraph.hpp"
#include "nodeflow/oracle.hpp"
#include "nodeflow/rateplan.hpp"
#include "nodeflow/subset.hpp"

#endif  // NODEFLOW_NODEFLOW_HPP
