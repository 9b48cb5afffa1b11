#pragma once

#include <string>
#include <vector>

#include "firesat/visibility.hpp"

namespace firesat::sched {

struct ScheduleHorizon {
    double duration_s = 0.0;   // T_r
    double dt_s = 0.0;
    int num_steps = 0;         // T = T_r / dt
    int num_stages = 0;        // S
    int steps_per_stage = 0;   // T^s = T / S

    /// Validates divisibility; throws std::invalid_argument.
    static ScheduleHorizon make(double duration_s, double dt_s, int num_stages);
};

/// Per-step data and battery deltas plus storage bounds. All values must
/// share a common quantum so the solver's resource lattice is exact.
struct ResourceParams {
    double data_obs_mb = 100.0;
    double data_comm_mb = 50.0;
    double data_min_mb = 0.0;
    double data_max_mb = 1500.0;
    double batt_charge_kj = 4.0;
    double batt_obs_kj = 3.0;
    double batt_comm_kj = 3.0;
    double batt_recon_kj = 20.0;
    double batt_time_kj = 2.0;
    double batt_min_kj = 0.0;
    double batt_max_kj = 100.0;
};

/// Everything the solver needs to know about one satellite. Slot geometry is
/// reduced to counts and transfer costs; orbital element bookkeeping stays
/// with the caller.
struct SatelliteData {
    std::string id;
    std::vector<int> slot_counts;                           // J^sk, s = 0..S
    std::vector<std::vector<std::vector<double>>> costs;    // [s-1][i][j], s = 1..S
    double initial_data_mb = 0.0;
    double initial_battery_kj = 100.0;
    double budget_km_s = 0.0;                               // c_max
};

struct ScheduleInstance {
    ScheduleHorizon horizon;
    std::vector<SatelliteData> satellites;
    vis::VisibilityTensors tensors;
    ResourceParams resources;
    double downlink_weight = 5.0;            // C
    std::vector<double> auxiliary_weights;   // O_p, one per auxiliary target

    int num_satellites() const { return static_cast<int>(satellites.size()); }
    int num_priority() const { return tensors.num_priority; }
    int num_auxiliary() const { return tensors.num_auxiliary; }
    int num_stations() const { return tensors.num_stations; }
};

struct BuildOptions {
    bool eossp = false;   // zero maneuver budget, no auxiliary targets
};

/// Assembles and cross-checks an instance; throws std::invalid_argument with
/// a description of any extent mismatch.
ScheduleInstance build_instance(ScheduleHorizon horizon,
                                std::vector<SatelliteData> satellites,
                                vis::VisibilityTensors tensors,
                                ResourceParams resources, double downlink_weight,
                                std::vector<double> auxiliary_weights,
                                BuildOptions options = {});

enum class TaskKind { observe, downlink, charge };

struct TaskEvent {
    int step = 0;           // global step, 1-based
    TaskKind kind = TaskKind::observe;
    int object_index = 0;   // target p or station g; unused for charge
};

struct SatelliteSchedule {
    std::vector<int> slot_path;          // size S+1, [0] is the initial slot
    std::vector<TaskEvent> events;       // ordered by step, at most one per step
    std::vector<std::pair<int, int>> aux_visits;   // (global step, p')
    std::vector<double> data_level;      // size T, level at each step start
    std::vector<double> battery_level;   // size T
    double final_data_mb = 0.0;          // post-horizon carryover values
    double final_battery_kj = 0.0;
    double maneuver_cost_total = 0.0;
};

enum class SolverStatus { optimal, feasible_timeout, infeasible };

std::string to_string(SolverStatus s);

struct Schedule {
    std::vector<SatelliteSchedule> satellites;
    double objective = 0.0;   // z
    SolverStatus status = SolverStatus::optimal;
};

struct SolveOptions {
    double timeout_s = 3600.0;
    long max_lattice_states = 4000000;   // data levels x battery levels
};

/**
 * Exact solver. The formulation has no cross-satellite constraint, so each
 * satellite solves independently: branch-and-bound over maneuver paths with
 * budget pruning and a per-stage best-case admissible bound, and for each
 * surviving path an exact dynamic program over time with the (data, battery)
 * level pair as state on the shared-quantum lattice.
 */
Schedule solve_exact(const ScheduleInstance& instance, SolveOptions options = {});

/**
 * Verification oracle: exhaustively enumerates maneuver paths and per-step
 * task choices with direct floating-point constraint checks. Refuses
 * instances whose masked assignment space exceeds 2^24.
 */
Schedule solve_bruteforce(const ScheduleInstance& instance);

/**
 * Re-solves tasks for global steps >= t_now with maneuvers frozen to
 * schedule's paths and resource levels replayed up to t_now. Earlier events
 * are preserved verbatim. Throws std::runtime_error if the executed prefix
 * violates the instance constraints.
 */
Schedule reschedule_remainder(const Schedule& schedule,
                              const ScheduleInstance& instance, int t_now,
                              SolveOptions options = {});

struct Violation {
    std::string constraint;   // e.g. "6e", "7c"
    std::string detail;
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Checks every constraint family and the objective identity; returns one
/// record per violated constraint instance (empty means feasible).
std::vector<Violation> validate_schedule(const Schedule& schedule,
                                         const ScheduleInstance& instance);

/// Canonical objective recomputation (Eq-4-style sum over events).
double objective_value(const Schedule& schedule, const ScheduleInstance& instance);

} // namespace firesat::sched
