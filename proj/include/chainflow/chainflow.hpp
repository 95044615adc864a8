#ifndef CHAINFLOW_CHAINFLOW_HPP
#define CHAINFLOW_CHAINFLOW_HPP

#include "chainflow/bytes.hpp"
#include "chainflow/chain_file.hpp"
#include "chainflow/contracts.hpp"
#include "chainflow/error.hpp"
#include "chainflow/events.hpp"
#include "chainflow/hash.hpp"
#include "chainflow/identity.hpp"
#include "chainflow/ledger.hpp"
#include "chainflow/network.hpp"
#include "chainflow/report.hpp"
#include "chainflow/rng.hpp"
#include "chainflow/scenario.hpp"
#include "chainflow/simulation.hpp"
#include "chainflow/supply_chain.hpp"

#endif  // CHAINFLOW_CHAINFLOW_HPP
