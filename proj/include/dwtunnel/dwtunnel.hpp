#pragma once

#include "dwtunnel/error.hpp"
#include "dwtunnel/potential.hpp"
#include "dwtunnel/grid.hpp"
#include "dwtunnel/gaussian_packet.hpp"
#include "dwtunnel/moment_dynamics.hpp"
#include "dwtunnel/fixed_points.hpp"
#include "dwtunnel/tdse.hpp"
#include "dwtunnel/tunneling.hpp"
