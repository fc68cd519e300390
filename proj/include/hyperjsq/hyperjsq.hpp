#pragma once

// Umbrella header: shortest-queue load balancing on hypergraphs of queues.

#include <hyperjsq/hypergraph.hpp>
#include <hyperjsq/generators.hpp>
#include <hyperjsq/allocation.hpp>
#include <hyperjsq/simplex.hpp>
#include <hyperjsq/optimization.hpp>
#include <hyperjsq/lyapunov.hpp>
#include <hyperjsq/rng.hpp>
#include <hyperjsq/simulator.hpp>
#include <hyperjsq/io.hpp>
