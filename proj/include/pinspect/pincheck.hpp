#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pinspect/match.hpp"

namespace pinspect {

enum class InspectMethod { kGradient, kIntensityOverlay, kEdgeOverlay, kDistanceToEdge };

std::string to_string(InspectMethod m);
InspectMethod inspect_method_from_string(const std::string& s);

struct PinScore {
  int pin_id = 0;
  InspectMethod method = InspectMethod::kGradient;
  double score = 0.0;
};

struct InspectionReport {
  std::vector<PinScore> scores;
  double min_score = 1.0;
  double cutoff = 0.0;
  bool accepted = false;
  bool empty_pin_warning = false;  // vacuous accept: no insertion pins
};

struct InspectConfig {
  double g_min = 10.0;            // gradient magnitude floor
  double canny_low = 50.0;        // intensity-step units
  double canny_high = 100.0;
  double distance_px = 2.0;       // distance-to-edge acceptance radius
  double edge_overlay_px = 1.0;   // edge overlay coincidence radius
  std::optional<double> background_threshold;  // Otsu when unset
  double depth_edge_threshold = 0.001;
  int min_edge_points = 8;
  RenderOptions render;           // shading used for the expected pin renders
};

// Renders the pin alone at the estimated pose and evaluates the gradient
// similarity of its edge template against the image.
PinScore score_gradient(const ImageU8& image, const RigidTransform& cam_T_obj,
                        const TriMesh& mesh, const std::vector<PinInstance>& instances,
                        int pin_id, const PinholeCamera& cam, const InspectConfig& cfg);

// Fraction of the expected pin silhouette classified foreground by the
// background model (dark object on a bright background).
PinScore score_intensity_overlay(const ImageU8& image, const RigidTransform& cam_T_obj,
                                 const TriMesh& mesh, const std::vector<PinInstance>& instances,
                                 int pin_id, const PinholeCamera& cam, const InspectConfig& cfg);

// Fraction of projected model edge pixels coinciding with detected image
// edges within edge_overlay_px.
PinScore score_edge_overlay(const ImageU8& image, const RigidTransform& cam_T_obj,
                            const TriMesh& mesh, const std::vector<PinInstance>& instances,
                            int pin_id, const PinholeCamera& cam, const InspectConfig& cfg);

// Fraction of projected model edge pixels whose nearest image edge lies
// closer than distance_px.
PinScore score_distance_to_edge(const ImageU8& image, const RigidTransform& cam_T_obj,
                                const TriMesh& mesh, const std::vector<PinInstance>& instances,
                                int pin_id, const PinholeCamera& cam, const InspectConfig& cfg);

PinScore score_pin(const ImageU8& image, const RigidTransform& cam_T_obj, const TriMesh& mesh,
                   const std::vector<PinInstance>& instances, int pin_id,
                   const PinholeCamera& cam, InspectMethod method, const InspectConfig& cfg);

// Midpoint of [max(bent), min(straight)]; NoSeparation when the
// populations overlap.
double calibrate_cutoff(const std::vector<double>& straight_scores,
                        const std::vector<double>& bent_scores);

// Scores every insertion pin; accepted iff the worst pin clears the cutoff.
// An empty pin list accepts vacuously with a warning flag.
InspectionReport inspect(const ImageU8& image, const RigidTransform& cam_T_obj,
                         const TriMesh& mesh, const std::vector<PinInstance>& instances,
                         const std::vector<int>& insertion_ids, const PinholeCamera& cam,
                         InspectMethod method, double cutoff, const InspectConfig& cfg);

struct CutoffCalibration {
  InspectMethod method = InspectMethod::kGradient;
  double cutoff = 0.0;
  std::vector<double> straight_scores;
  std::vector<double> bent_scores;
};

void save_calibration(const CutoffCalibration& cal, const std::filesystem::path& path);
CutoffCalibration load_calibration(const std::filesystem::path& path);

}  // namespace pinspect
