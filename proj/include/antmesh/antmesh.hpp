#pragma once

#include "antmesh/config.hpp"
#include "antmesh/engine.hpp"
#include "antmesh/errors.hpp"
#include "antmesh/harness.hpp"
#include "antmesh/metrics.hpp"
#include "antmesh/mobility.hpp"
#include "antmesh/net.hpp"
#include "antmesh/packet.hpp"
#include "antmesh/protocols/anthocnet.hpp"
#include "antmesh/protocols/antnet.hpp"
#include "antmesh/protocols/aodv.hpp"
#include "antmesh/protocols/ara.hpp"
#include "antmesh/protocols/paconet.hpp"
#include "antmesh/random.hpp"
#include "antmesh/routing.hpp"
#include "antmesh/simulation.hpp"
#include "antmesh/workload.hpp"
