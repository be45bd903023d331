#include "rlss/scenario_io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <random>
#include <sstream>

namespace rlss {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw ScenarioError("scenario: field '" + field + "': " + what);
}

const json& require(const json& doc, const std::string& key, const std::string& ctx) {
    auto it = doc.find(key);
    if (it == doc.end()) fail(ctx + key, "missing");
    return *it;
}

Vec parse_vec(const json& arr, int dim, const std::string& field) {
    if (!arr.is_array() || static_cast<int>(arr.size()) != dim)
        fail(field, "expected an array of " + std::to_string(dim) + " numbers");
    Vec v(dim);
    for (int i = 0; i < dim; ++i) {
        if (!arr[i].is_number()) fail(field, "expected numbers");
        v(i) = arr[i].get<double>();
    }
    return v;
}

Vec parse_scalar_or_vec(const json& node, int dim, const std::string& field) {
    if (node.is_number()) return Vec::Constant(dim, node.get<double>());
    return parse_vec(node, dim, field);
}

double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

// Ordered 2D polygons must be convex; higher-dimensional vertex lists are
// taken as the convex hull of the points.
void check_polygon_convexity(const Eigen::MatrixXd& verts, const std::string& field) {
    if (verts.rows() != 2 || verts.cols() < 4) return;
    const int m = static_cast<int>(verts.cols());
    double sign = 0.0;
    for (int i = 0; i < m; ++i) {
        Eigen::Vector2d a = verts.col((i + 1) % m) - verts.col(i);
        Eigen::Vector2d b = verts.col((i + 2) % m) - verts.col((i + 1) % m);
        double cross = a.x() * b.y() - a.y() * b.x();
        if (std::abs(cross) < 1e-12) continue;
        if (sign == 0.0)
            sign = cross;
        else if (sign * cross < 0.0)
            fail(field, "vertex list is not a convex polygon (reflex vertex " +
                            std::to_string((i + 1) % m) + ")");
    }
}

ConvexShape parse_shape(const json& node, int dim, const std::string& field) {
    if (node.contains("box")) {
        Vec half = parse_scalar_or_vec(node["box"], dim, field + ".box");
        if ((half.array() <= 0.0).any()) fail(field + ".box", "half extents must be positive");
        return ConvexShape::box(half);
    }
    if (node.contains("vertices")) {
        const json& arr = node["vertices"];
        if (!arr.is_array() || arr.empty()) fail(field + ".vertices", "expected a non-empty array");
        Eigen::MatrixXd verts(dim, arr.size());
        for (size_t i = 0; i < arr.size(); ++i)
            verts.col(i) = parse_vec(arr[i], dim, field + ".vertices[" + std::to_string(i) + "]");
        check_polygon_convexity(verts, field + ".vertices");
        return ConvexShape::points(verts);
    }
    fail(field, "expected 'box' or 'vertices'");
}

Workspace parse_workspace(const json& node, int dim, const std::string& field, Vec& lo, Vec& hi) {
    lo = parse_vec(require(node, "min", field + "."), dim, field + ".min");
    hi = parse_vec(require(node, "max", field + "."), dim, field + ".max");
    if ((hi - lo).minCoeff() <= 0.0) fail(field, "max must exceed min");
    return Workspace::box(lo, hi);
}

RobotConfig parse_config(const json& node, int dim, const Workspace& default_workspace,
                         const std::string& field) {
    RobotConfig cfg = RobotConfig::defaults(dim);
    cfg.workspace = default_workspace;

    if (node.contains("shape")) cfg.shape = parse_shape(node["shape"], dim, field + ".shape");
    if (node.contains("workspace")) {
        Vec lo, hi;
        cfg.workspace = parse_workspace(node["workspace"], dim, field + ".workspace", lo, hi);
    }
    if (node.contains("continuity")) cfg.continuity = node["continuity"].get<int>();
    if (node.contains("derivative_limits")) {
        cfg.derivative_limits.clear();
        for (const auto& g : node["derivative_limits"]) cfg.derivative_limits.push_back(g.get<double>());
    }
    if (node.contains("replan_period")) cfg.replan_period = node["replan_period"].get<double>();
    if (node.contains("horizon")) cfg.horizon = node["horizon"].get<double>();
    if (node.contains("piece_count")) cfg.piece_count = node["piece_count"].get<int>();
    if (node.contains("degrees")) {
        cfg.degrees.clear();
        if (node["degrees"].is_number())
            cfg.degrees.assign(cfg.piece_count, node["degrees"].get<int>());
        else
            for (const auto& h : node["degrees"]) cfg.degrees.push_back(h.get<int>());
    } else if (static_cast<int>(cfg.degrees.size()) != cfg.piece_count) {
        cfg.degrees.assign(cfg.piece_count, cfg.degrees.front());
    }
    if (node.contains("energy_weights")) {
        cfg.energy_weights.clear();
        for (const auto& w : node["energy_weights"]) cfg.energy_weights.push_back(w.get<double>());
    }
    if (node.contains("deviation_weights")) {
        cfg.deviation_weights.clear();
        for (const auto& w : node["deviation_weights"]) cfg.deviation_weights.push_back(w.get<double>());
    } else if (static_cast<int>(cfg.deviation_weights.size()) != cfg.piece_count) {
        cfg.deviation_weights.assign(cfg.piece_count, 1.0);
        cfg.deviation_weights.back() = 100.0;
    }
    if (node.contains("rescale_factor")) cfg.rescale_factor = node["rescale_factor"].get<double>();
    if (node.contains("soft_weight")) cfg.soft_weight = node["soft_weight"].get<double>();
    if (node.contains("max_rescale_attempts"))
        cfg.max_rescale_attempts = node["max_rescale_attempts"].get<int>();
    if (node.contains("search_avoids_robots"))
        cfg.search_avoids_robots = node["search_avoids_robots"].get<bool>();
    if (node.contains("obstacle_prune_padding"))
        cfg.obstacle_prune_padding = node["obstacle_prune_padding"].get<double>();
    if (node.contains("robot_safety_margin"))
        cfg.robot_safety_margin = node["robot_safety_margin"].get<double>();

    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        fail(field, e.what());
    }
    return cfg;
}

const char* const kConfigKeys[] = {
    "shape",          "workspace",        "continuity",       "derivative_limits",
    "replan_period",  "horizon",          "piece_count",      "degrees",
    "energy_weights", "deviation_weights", "rescale_factor",  "soft_weight",
    "max_rescale_attempts", "search_avoids_robots", "obstacle_prune_padding",
    "robot_safety_margin"};

json config_subset(const json& node) {
    json out = json::object();
    for (const char* key : kConfigKeys)
        if (node.contains(key)) out[key] = node[key];
    return out;
}

void rasterize_box(OccupancyGrid& grid, const Vec& lo, const Vec& hi) {
    grid.for_each_cell_in_aabb(lo, hi, [&](const Eigen::VectorXi& cell) {
        Vec clo, chi;
        grid.cell_bounds(cell, clo, chi);
        if (boxes_intersect(lo, hi, clo, chi, -1e-9)) grid.set_occupied(cell);
    });
}

void generate_forest(OccupancyGrid& grid, const json& node, const std::vector<Vec>& keep_clear,
                     const std::string& field) {
    const int d = grid.dimension();
    std::uint64_t seed = require(node, "seed", field + ".").get<std::uint64_t>();
    int count = require(node, "count", field + ".").get<int>();
    Vec rlo = parse_vec(require(node, "region", field + ".")[0], d, field + ".region[0]");
    Vec rhi = parse_vec(node["region"][1], d, field + ".region[1]");
    Vec box_size = node.contains("box_size")
                       ? parse_scalar_or_vec(node["box_size"], d, field + ".box_size")
                       : grid.cell_size();
    double clearance = node.value("clearance", 1.0);
    bool snap = node.value("snap", false);  // align boxes to the cell lattice

    std::mt19937_64 rng(seed);
    int placed = 0;
    for (long attempt = 0; attempt < 200L * count && placed < count; ++attempt) {
        Vec lo(d);
        for (int a = 0; a < d; ++a) {
            lo(a) = rlo(a) + uniform01(rng) * std::max(0.0, rhi(a) - rlo(a) - box_size(a));
            if (snap)
                lo(a) = grid.origin()(a) +
                        std::floor((lo(a) - grid.origin()(a)) / grid.cell_size()(a)) *
                            grid.cell_size()(a) +
                        1e-9;
        }
        Vec hi = lo + box_size * (snap ? 1.0 - 1e-8 : 1.0);
        bool clear = true;
        for (const auto& p : keep_clear)
            if (aabb_distance(lo, hi, p, p) < clearance) {
                clear = false;
                break;
            }
        if (!clear) continue;
        rasterize_box(grid, lo, hi);
        ++placed;
    }
    if (placed < count) fail(field, "could not place the requested obstacle count");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Scenario parse_scenario(const json& doc, const ScenarioOverrides& overrides) {
    Scenario scn;
    scn.name = doc.value("name", "scenario");

    const json& grid_node = require(doc, "grid", "");
    const json& origin_node = require(grid_node, "origin", "grid.");
    const int d = static_cast<int>(origin_node.size());
    if (d != 2 && d != 3) fail("grid.origin", "dimension must be 2 or 3");
    if (doc.contains("dimension") && doc["dimension"].get<int>() != d)
        fail("dimension", "does not match grid.origin");
    scn.dimension = d;

    Vec origin = parse_vec(origin_node, d, "grid.origin");
    Vec cell_size = parse_scalar_or_vec(require(grid_node, "cell_size", "grid."), d, "grid.cell_size");
    if (overrides.cell_size) cell_size = Vec::Constant(d, *overrides.cell_size);
    if ((cell_size.array() <= 0.0).any()) fail("grid.cell_size", "must be positive");

    Eigen::VectorXi dims(d);
    if (grid_node.contains("extent_max")) {
        Vec hi = parse_vec(grid_node["extent_max"], d, "grid.extent_max");
        for (int a = 0; a < d; ++a)
            dims(a) = std::max(1, static_cast<int>(std::ceil((hi(a) - origin(a)) / cell_size(a) - 1e-9)));
    } else {
        const json& dims_node = require(grid_node, "dims", "grid.");
        if (overrides.cell_size)
            fail("grid.dims", "cell size sweeps need grid.extent_max instead of dims");
        if (static_cast<int>(dims_node.size()) != d) fail("grid.dims", "dimension mismatch");
        for (int a = 0; a < d; ++a) dims(a) = dims_node[a].get<int>();
    }
    scn.grid = OccupancyGrid(origin, cell_size, dims);

    if (grid_node.contains("occupied_cells")) {
        if (overrides.cell_size)
            fail("grid.occupied_cells", "cell size sweeps need obstacle_boxes or forest");
        for (const auto& c : grid_node["occupied_cells"]) {
            Eigen::VectorXi cell(d);
            for (int a = 0; a < d; ++a) cell(a) = c[a].get<int>();
            if (!scn.grid.in_bounds(cell)) fail("grid.occupied_cells", "cell out of bounds");
            scn.grid.set_occupied(cell);
        }
    }
    if (grid_node.contains("obstacle_boxes")) {
        for (const auto& b : grid_node["obstacle_boxes"]) {
            Vec lo = parse_vec(b[0], d, "grid.obstacle_boxes[..][0]");
            Vec hi = parse_vec(b[1], d, "grid.obstacle_boxes[..][1]");
            rasterize_box(scn.grid, lo, hi);
        }
    }

    Vec ws_lo = scn.grid.extent_lo(), ws_hi = scn.grid.extent_hi();
    Workspace default_workspace = Workspace::box(ws_lo, ws_hi);
    if (doc.contains("workspace")) {
        default_workspace = parse_workspace(doc["workspace"], d, "workspace", ws_lo, ws_hi);
        for (int a = 0; a < d; ++a)
            if (ws_lo(a) < scn.grid.extent_lo()(a) - 1e-9 ||
                ws_hi(a) > scn.grid.extent_hi()(a) + 1e-9)
                fail("workspace", "must lie within the grid extent");
    }

    std::string strategy = doc.value("strategy", "HARD_SOFT");
    if (strategy == "HARD")
        scn.strategy = Strategy::hard;
    else if (strategy == "HARD_SOFT")
        scn.strategy = Strategy::hard_soft;
    else
        fail("strategy", "expected HARD or HARD_SOFT");
    if (overrides.strategy) scn.strategy = *overrides.strategy;

    scn.duration_cap = doc.value("duration_cap", 60.0);
    if (overrides.duration_cap) scn.duration_cap = *overrides.duration_cap;
    if (scn.duration_cap <= 0.0) fail("duration_cap", "must be positive");
    scn.sensing_range = doc.value("sensing_range", 0.0);
    scn.trace_period = doc.value("trace_period", 0.01);
    if (overrides.trace_period) scn.trace_period = *overrides.trace_period;
    if (scn.trace_period <= 0.0) fail("trace_period", "must be positive");
    scn.goal_tolerance = doc.value("goal_tolerance", 1e-2);
    scn.deadlock_window = doc.value("deadlock_window", 5.0);
    scn.deadlock_eps = doc.value("deadlock_eps", 1e-2);
    scn.sensing_noise = doc.value("sensing_noise", 0.0);
    scn.noise_seed = doc.value("noise_seed", 0);

    const json& robots_node = require(doc, "robots", "");
    if (!robots_node.is_array() || robots_node.empty()) fail("robots", "expected a non-empty array");
    json defaults = doc.value("defaults", json::object());

    int robot_count = static_cast<int>(robots_node.size());
    if (overrides.robot_count) {
        if (*overrides.robot_count < 1 || *overrides.robot_count > robot_count)
            fail("robots", "robot count override out of range");
        robot_count = *overrides.robot_count;
    }

    for (int i = 0; i < robot_count; ++i) {
        const json& rnode = robots_node[i];
        const std::string field = "robots[" + std::to_string(i) + "]";
        json cfg_json = defaults;
        cfg_json.merge_patch(config_subset(rnode));

        ScenarioRobot robot;
        robot.cfg = parse_config(cfg_json, d, default_workspace, field);
        robot.start = parse_vec(require(rnode, "start", field + "."), d, field + ".start");

        if (rnode.contains("desired")) {
            const json& dnode = rnode["desired"];
            std::vector<double> times;
            std::vector<Vec> points;
            for (const auto& t : require(dnode, "times", field + ".desired.")) times.push_back(t.get<double>());
            for (const auto& p : require(dnode, "points", field + ".desired."))
                points.push_back(parse_vec(p, d, field + ".desired.points"));
            try {
                robot.desired = DesiredTrajectory::from_waypoints(times, points);
            } catch (const std::invalid_argument& e) {
                fail(field + ".desired", e.what());
            }
        } else if (rnode.contains("goal")) {
            Vec goal = parse_vec(rnode["goal"], d, field + ".goal");
            double speed = rnode.value("speed", defaults.value("speed", 1.0));
            if (speed <= 0.0) fail(field + ".speed", "must be positive");
            double dur = std::max((goal - robot.start).norm() / speed, 1e-3);
            robot.desired = DesiredTrajectory::from_waypoints({0.0, dur}, {robot.start, goal});
        } else {
            fail(field, "expected 'desired' or 'goal'");
        }
        if (robot.desired.path.dimension() != d) fail(field + ".desired", "dimension mismatch");
        scn.robots.push_back(std::move(robot));
    }

    if (grid_node.contains("forest")) {
        std::vector<Vec> keep_clear;
        for (const auto& r : scn.robots) {
            keep_clear.push_back(r.start);
            keep_clear.push_back(r.desired.endpoint());
        }
        generate_forest(scn.grid, grid_node["forest"], keep_clear, "grid.forest");
    }

    // Scenario invariants: starts inside workspaces, collision-free against
    // the grid and pairwise.
    for (int i = 0; i < robot_count; ++i) {
        const auto& r = scn.robots[i];
        const std::string field = "robots[" + std::to_string(i) + "].start";
        if (!r.cfg.workspace.contains_shape(r.cfg.shape, r.start))
            fail(field, "robot shape does not fit in the workspace");
        if (!placement_clear_of_obstacles(scn.grid, r.cfg.shape, r.start))
            fail(field, "start overlaps an occupied cell");
        for (int j = 0; j < i; ++j)
            if (shapes_overlap(r.cfg.shape, r.start, scn.robots[j].cfg.shape, scn.robots[j].start))
                fail(field, "start overlaps robot " + std::to_string(j));
    }
    scn.timestep();  // validates the shared replanning period
    return scn;
}

Scenario parse_scenario_file(const std::string& path, const ScenarioOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("scenario: cannot open '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ScenarioError(std::string("scenario: ") + e.what());
    }
    return parse_scenario(doc, overrides);
}

nlohmann::json scenario_echo(const Scenario& scn) {
    json robots = json::array();
    for (const auto& r : scn.robots) {
        json cfg{{"continuity", r.cfg.continuity},
                 {"derivative_limits", r.cfg.derivative_limits},
                 {"replan_period", r.cfg.replan_period},
                 {"horizon", r.cfg.horizon},
                 {"piece_count", r.cfg.piece_count},
                 {"degrees", r.cfg.degrees},
                 {"energy_weights", r.cfg.energy_weights},
                 {"deviation_weights", r.cfg.deviation_weights},
                 {"rescale_factor", r.cfg.rescale_factor},
                 {"soft_weight", r.cfg.soft_penalty()},
                 {"max_rescale_attempts", r.cfg.max_rescale_attempts},
                 {"search_avoids_robots", r.cfg.search_avoids_robots},
                 {"robot_safety_margin", r.cfg.robot_margin()}};
        std::vector<double> start(r.start.data(), r.start.data() + r.start.size());
        robots.push_back(json{{"start", start}, {"config", cfg}});
    }
    std::vector<int> dims(scn.grid.dims().data(), scn.grid.dims().data() + scn.grid.dims().size());
    return json{{"name", scn.name},
                {"dimension", scn.dimension},
                {"strategy", to_string(scn.strategy)},
                {"timestep", scn.timestep()},
                {"duration_cap", scn.duration_cap},
                {"sensing_range", scn.sensing_range},
                {"trace_period", scn.trace_period},
                {"goal_tolerance", scn.goal_tolerance},
                {"deadlock_window", scn.deadlock_window},
                {"deadlock_eps", scn.deadlock_eps},
                {"sensing_noise", scn.sensing_noise},
                {"noise_seed", scn.noise_seed},
                {"grid", json{{"dims", dims},
                              {"cell_size", scn.grid.cell_size()(0)},
                              {"num_cells", scn.grid.num_cells()},
                              {"num_obstacles", scn.grid.occupied_count()}}},
                {"robots", robots}};
}

nlohmann::json metrics_to_json(const RunMetrics& m, const Scenario& scn) {
    return json{{"collisions", m.collisions},
                {"deadlocks", m.deadlocks},
                {"total_distance", m.total_distance},
                {"completed", m.completed},
                {"end_time", m.end_time},
                {"goal_reached", m.goal_reached},
                {"deadlocked", m.deadlocked},
                {"compute_max_ms", m.compute_max_ms},
                {"compute_avg_ms", m.compute_avg_ms},
                {"per_robot_max_ms", m.per_robot_max_ms},
                {"per_robot_avg_ms", m.per_robot_avg_ms},
                {"failed_iterations", m.failed_iterations},
                {"soft_iterations", m.soft_iterations},
                {"total_rescales", m.total_rescales},
                {"max_continuity_error", m.max_continuity_error},
                {"max_workspace_violation", m.max_workspace_violation},
                {"max_validity_ratio", m.max_validity_ratio},
                {"scenario", scenario_echo(scn)}};
}

void write_trace(const Trace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trace: cannot open '" + path + "'");
    out << "# rlss-trace v1 dimension=" << trace.dimension << " robots=" << trace.num_robots
        << " sample_period=" << format_double(trace.sample_period)
        << " timestep=" << format_double(trace.timestep)
        << " end_time=" << format_double(trace.end_time) << " hit_cap=" << (trace.hit_cap ? 1 : 0)
        << "\n";
    out << "time,robot";
    const char* axes[] = {"x", "y", "z"};
    for (int a = 0; a < trace.dimension; ++a) out << "," << axes[a];
    out << ",plan_ok,failed_stage,soft,rescales\n";
    for (size_t k = 0; k < trace.sample_times.size(); ++k) {
        for (int i = 0; i < trace.num_robots; ++i) {
            out << format_double(trace.sample_times[k]) << "," << i;
            for (int a = 0; a < trace.dimension; ++a)
                out << "," << format_double(trace.positions[k][i](a));
            if (trace.iterations.empty()) {
                out << ",1,-,0,0";
            } else {
                const IterationRecord& rec = trace.record_for_sample(static_cast<int>(k), i);
                out << "," << (rec.success ? 1 : 0) << ","
                    << (rec.success ? "-" : to_string(rec.failed_stage)) << ","
                    << (rec.soft_used ? 1 : 0) << "," << rec.rescales;
            }
            out << "\n";
        }
    }
    if (!out) throw std::runtime_error("write_trace: write failed for '" + path + "'");
}

Trace read_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_trace: cannot open '" + path + "'");
    Trace trace;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# rlss-trace v1", 0) != 0)
        throw std::runtime_error("read_trace: missing or unsupported header");
    std::istringstream header(line.substr(15));
    std::string token;
    while (header >> token) {
        auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        std::string key = token.substr(0, eq), value = token.substr(eq + 1);
        if (key == "dimension") trace.dimension = std::stoi(value);
        else if (key == "robots") trace.num_robots = std::stoi(value);
        else if (key == "sample_period") trace.sample_period = std::stod(value);
        else if (key == "timestep") trace.timestep = std::stod(value);
        else if (key == "end_time") trace.end_time = std::stod(value);
        else if (key == "hit_cap") trace.hit_cap = value == "1";
    }
    std::getline(in, line);  // column header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        if (static_cast<int>(cells.size()) < 2 + trace.dimension)
            throw std::runtime_error("read_trace: malformed row");
        double t = std::stod(cells[0]);
        int robot = std::stoi(cells[1]);
        Vec p(trace.dimension);
        for (int a = 0; a < trace.dimension; ++a) p(a) = std::stod(cells[2 + a]);
        if (robot == 0) {
            trace.sample_times.push_back(t);
            trace.positions.emplace_back(trace.num_robots);
        }
        trace.positions.back()[robot] = std::move(p);
    }
    return trace;
}

void write_per_robot_samples(const Trace& trace, const std::string& dir) {
    const char* axes[] = {"x", "y", "z"};
    for (int i = 0; i < trace.num_robots; ++i) {
        std::string path = dir + "/robot_" + std::to_string(i) + ".csv";
        std::ofstream out(path);
        if (!out) throw std::runtime_error("write_per_robot_samples: cannot open '" + path + "'");
        out << "time";
        for (int a = 0; a < trace.dimension; ++a) out << "," << axes[a];
        out << "\n";
        for (size_t k = 0; k < trace.sample_times.size(); ++k) {
            out << format_double(trace.sample_times[k]);
            for (int a = 0; a < trace.dimension; ++a)
                out << "," << format_double(trace.positions[k][i](a));
            out << "\n";
        }
    }
}

namespace {

struct SweepRow {
    std::string label;
    int robots = 0;
    double cell_size = 0.0;
    RunMetrics metrics;
};

int run_one(const std::string& scenario_path, const ScenarioOverrides& overrides,
            const std::string& out_dir, bool per_robot, SweepRow* row) {
    Scenario scn;
    try {
        scn = parse_scenario_file(scenario_path, overrides);
    } catch (const ScenarioError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    RunOutput out = run(scn);
    try {
        std::filesystem::create_directories(out_dir);
        write_trace(out.trace, out_dir + "/trace.csv");
        std::ofstream mf(out_dir + "/metrics.json");
        if (!mf) throw std::runtime_error("cannot open metrics.json");
        mf << metrics_to_json(out.metrics, scn).dump(2) << "\n";
        if (per_robot) write_per_robot_samples(out.trace, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return 2;
    }
    std::cout << scn.name << ": robots=" << scn.robots.size()
              << " collisions=" << out.metrics.collisions << " deadlocks=" << out.metrics.deadlocks
              << " distance=" << out.metrics.total_distance
              << " completed=" << (out.metrics.completed ? "yes" : "no")
              << " avg_ms=" << out.metrics.compute_avg_ms << " max_ms=" << out.metrics.compute_max_ms
              << "\n";
    if (row) {
        row->robots = static_cast<int>(scn.robots.size());
        row->cell_size = scn.grid.cell_size()(0);
        row->metrics = out.metrics;
    }
    return 0;
}

}  // namespace

int run_experiment(const std::string& scenario_path, const ExperimentOptions& options) {
    std::vector<std::pair<std::string, ScenarioOverrides>> variants;
    if (options.sweep_robots.empty() && options.sweep_cell_sizes.empty()) {
        variants.emplace_back("", options.overrides);
    } else {
        std::vector<std::optional<int>> robot_list;
        std::vector<std::optional<double>> cell_list;
        if (options.sweep_robots.empty())
            robot_list.push_back(options.overrides.robot_count);
        else
            for (int r : options.sweep_robots) robot_list.emplace_back(r);
        if (options.sweep_cell_sizes.empty())
            cell_list.push_back(options.overrides.cell_size);
        else
            for (double c : options.sweep_cell_sizes) cell_list.emplace_back(c);
        for (const auto& r : robot_list)
            for (const auto& c : cell_list) {
                ScenarioOverrides ov = options.overrides;
                ov.robot_count = r;
                ov.cell_size = c;
                std::ostringstream label;
                if (r) label << "r" << *r;
                if (c) label << (r ? "_" : "") << "cs" << *c;
                variants.emplace_back(label.str(), ov);
            }
    }

    std::vector<SweepRow> rows(variants.size());
    std::vector<int> codes(variants.size(), 0);
    auto job = [&](size_t v) {
        const auto& [label, ov] = variants[v];
        rows[v].label = label;
        std::string dir = label.empty() ? options.out_dir : options.out_dir + "/" + label;
        codes[v] = run_one(scenario_path, ov, dir, options.per_robot_files, &rows[v]);
    };

    if (options.parallel_sweep && variants.size() > 1) {
        std::vector<std::future<void>> jobs;
        for (size_t v = 0; v < variants.size(); ++v)
            jobs.push_back(std::async(std::launch::async, job, v));
        for (auto& j : jobs) j.get();
    } else {
        for (size_t v = 0; v < variants.size(); ++v) job(v);
    }

    for (int code : codes)
        if (code != 0) return code;

    if (variants.size() > 1) {
        std::filesystem::create_directories(options.out_dir);
        std::ofstream sweep(options.out_dir + "/sweep.csv");
        sweep << "label,robots,cell_size,collisions,deadlocks,distance,completed,end_time,"
                 "max_ms,avg_ms\n";
        for (const auto& row : rows)
            sweep << row.label << "," << row.robots << "," << row.cell_size << ","
                  << row.metrics.collisions << "," << row.metrics.deadlocks << ","
                  << row.metrics.total_distance << "," << (row.metrics.completed ? 1 : 0) << ","
                  << row.metrics.end_time << "," << row.metrics.compute_max_ms << ","
                  << row.metrics.compute_avg_ms << "\n";
    }
    return 0;
}

}  // namespace rlss
