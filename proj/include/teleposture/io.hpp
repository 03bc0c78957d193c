#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "teleposture/calib.hpp"
#include "teleposture/filter.hpp"
#include "teleposture/ik.hpp"
#include "teleposture/model.hpp"
#include "teleposture/rula.hpp"

namespace teleposture {

inline constexpr int kFormatVersion = 1;

/// Non-fatal findings (e.g. renormalized quaternions) are appended here when given.
using Warnings = std::vector<std::string>;

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// ---- models -----------------------------------------------------------------

HumanModel bundled_default_model();
HumanModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const HumanModel& model);
HumanModel read_model(const std::filesystem::path& path);
void write_model(const std::filesystem::path& path, const HumanModel& model);

// ---- stylus trajectories ----------------------------------------------------

/// Full trajectories carry velocity columns; pose-only files (t, px..qz) get
/// velocities from velocity_from_poses. Quaternions with |norm - 1| <= 1e-3
/// are renormalized with a warning, larger drift is a ParseError.
std::vector<StylusObservation> parse_trajectory(std::istream& in, Warnings* warnings = nullptr);
std::vector<StylusObservation> read_trajectory(const std::filesystem::path& path,
                                               Warnings* warnings = nullptr);
std::string format_trajectory(const std::vector<StylusObservation>& traj);
void write_trajectory(const std::filesystem::path& path, const std::vector<StylusObservation>& traj);

/// Central differences inside, one-sided at both ends. Angular velocity is
/// the world-frame rotation vector of R_{k+1} R_{k-1}^T over the time span.
std::vector<StylusObservation> velocity_from_poses(
    const std::vector<std::pair<double, TaskSpacePose>>& poses);

// ---- posture trajectories ---------------------------------------------------

struct PostureTrajectory {
  std::vector<double> t;
  std::vector<PostureState> states;
};

PostureTrajectory parse_postures(std::istream& in);
PostureTrajectory read_postures(const std::filesystem::path& path);
std::string format_postures(const PostureTrajectory& traj);
void write_postures(const std::filesystem::path& path, const PostureTrajectory& traj);

// ---- filter estimates (JSON lines) ------------------------------------------

struct EstimateRecord {
  PostureEstimate estimate;
  std::optional<RulaDistribution> rula;
  std::optional<int> map_grand;
};

nlohmann::json estimate_to_json(const EstimateRecord& rec);
EstimateRecord estimate_from_json(const nlohmann::json& j);
std::vector<EstimateRecord> parse_estimates(std::istream& in);
std::vector<EstimateRecord> read_estimates(const std::filesystem::path& path);
std::string format_estimates(const std::vector<EstimateRecord>& records);
void write_estimates(const std::filesystem::path& path, const std::vector<EstimateRecord>& records);

/// MAP postures of an estimate file as a posture trajectory.
PostureTrajectory estimates_to_postures(const std::vector<EstimateRecord>& records);

// ---- calibration recordings -------------------------------------------------

CalibrationRecording parse_calibration(std::istream& in);
CalibrationRecording read_calibration(const std::filesystem::path& path);
std::string format_calibration(const CalibrationRecording& rec);
void write_calibration(const std::filesystem::path& path, const CalibrationRecording& rec);

// ---- configuration ----------------------------------------------------------
// Unknown keys are rejected; missing keys keep the defaults of `base`.

FilterConfig filter_config_from_json(const nlohmann::json& j, FilterConfig base = {});
nlohmann::json filter_config_to_json(const FilterConfig& cfg);
IkConfig ik_config_from_json(const nlohmann::json& j, IkConfig base = {});
nlohmann::json ik_config_to_json(const IkConfig& cfg);
RulaAssumptions rula_assumptions_from_json(const nlohmann::json& j, RulaAssumptions base = {});
nlohmann::json rula_assumptions_to_json(const RulaAssumptions& a);

}  // namespace teleposture
