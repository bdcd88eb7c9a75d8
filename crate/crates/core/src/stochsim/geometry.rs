//! Accessible domain, boundary patches and their behaviors.

use serde::{Deserialize, Serialize};

use crate::error::{domain, require_positive, Error, Result};
use crate::physics::{FlowField, SpacePoint};

/// Building block of the accessible domain; the domain is the union of regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Region {
    /// Axis-aligned box `[min, max]`.
    Box { min: SpacePoint, max: SpacePoint },
    Sphere { center: SpacePoint, radius: f64 },
    /// Cylinder along +z from `base` (center of the lower cap), of `radius` and `length`.
    Cylinder { base: SpacePoint, radius: f64, length: f64 },
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Region::Box { min, max } => {
                if !(min.x < max.x && min.y < max.y && min.z < max.z) {
                    return Err(domain!("box min {min:?} must be below max {max:?} on every axis"));
                }
            }
            Region::Sphere { radius, .. } => require_positive("radius", radius)?,
            Region::Cylinder { radius, length, .. } => {
                require_positive("radius", radius)?;
                require_positive("length", length)?;
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: &SpacePoint) -> bool {
        match *self {
            Region::Box { min, max } => {
                p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z && p.z <= max.z
            }
            Region::Sphere { center, radius } => (*p - center).norm_sq() <= radius * radius,
            Region::Cylinder { base, radius, length } => {
                let (dx, dy) = (p.x - base.x, p.y - base.y);
                dx * dx + dy * dy <= radius * radius && p.z >= base.z && p.z <= base.z + length
            }
        }
    }

    pub fn volume(&self) -> f64 {
        match *self {
            Region::Box { min, max } => (max.x - min.x) * (max.y - min.y) * (max.z - min.z),
            Region::Sphere { radius, .. } => 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3),
            Region::Cylinder { radius, length, .. } => std::f64::consts::PI * radius * radius * length,
        }
    }

    /// Boundary part crossed by a move along `axis` in direction `sign`
    /// from a point inside this region.
    fn exit_face(&self, axis: usize, sign: f64) -> Face {
        match self {
            Region::Box { .. } => Face::Box { axis: axis as u8, upper: sign > 0.0 },
            Region::Sphere { .. } => Face::Wall,
            Region::Cylinder { .. } if axis == 2 => Face::Cap { upper: sign > 0.0 },
            Region::Cylinder { .. } => Face::Wall,
        }
    }
}

/// Part of a region's boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "face", rename_all = "snake_case", deny_unknown_fields)]
pub enum Face {
    /// Box face normal to `axis` (0 = x, 1 = y, 2 = z), at the upper or lower bound.
    Box { axis: u8, upper: bool },
    /// Curved wall of a sphere or cylinder.
    Wall,
    /// Cylinder end cap.
    Cap { upper: bool },
}

/// Surface patch that can carry a behavior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "patch", rename_all = "snake_case", deny_unknown_fields)]
pub enum Patch {
    /// Boundary face of region `region`.
    RegionFace { region: usize, face: Face },
    /// Free-standing sphere inside the domain (receiver or obstacle).
    Sphere { center: SpacePoint, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Behavior {
    /// The offending coordinate is reverted to its pre-move value.
    Reflective,
    /// The particle is removed on crossing.
    Absorbing,
    /// The surface has no effect on motion.
    Transparent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Surface {
    pub patch: Patch,
    pub behavior: Behavior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Species {
    pub name: String,
    pub diffusion: f64,
}

/// First-order reaction `reactant → product` (or removal when `product` is `None`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirstOrderReaction {
    pub reactant: usize,
    pub product: Option<usize>,
    pub kappa: f64,
}

/// Simulation environment of the particle simulator. An empty region list
/// means unbounded space.
#[derive(Debug, Clone, Default)]
pub struct Environment {
    pub regions: Vec<Region>,
    pub surfaces: Vec<Surface>,
    /// Behavior of region faces not listed in `surfaces`.
    pub default_behavior: Option<Behavior>,
    pub flow: FlowField,
    pub species: Vec<Species>,
    pub reactions: Vec<FirstOrderReaction>,
}

/// Outcome of resolving one proposed move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MoveOutcome {
    Moved(SpacePoint),
    /// Absorbed by surface index `surface` (`None` for an unlisted face).
    Absorbed(Option<usize>),
}

impl Environment {
    pub fn unbounded(species: Vec<Species>) -> Self {
        Self { species, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.species.is_empty() {
            return Err(domain!("at least one species required"));
        }
        for s in &self.species {
            crate::error::require_non_negative("D", s.diffusion)?;
        }
        for r in &self.regions {
            r.validate()?;
        }
        for s in &self.surfaces {
            match s.patch {
                Patch::RegionFace { region, face } => {
                    let r = self
                        .regions
                        .get(region)
                        .ok_or_else(|| domain!("surface refers to missing region {region}"))?;
                    let ok = match (r, face) {
                        (Region::Box { .. }, Face::Box { axis, .. }) => axis < 3,
                        (Region::Sphere { .. }, Face::Wall) => true,
                        (Region::Cylinder { .. }, Face::Wall | Face::Cap { .. }) => true,
                        _ => false,
                    };
                    if !ok {
                        return Err(domain!("face {face:?} does not belong to region {region}"));
                    }
                }
                Patch::Sphere { radius, .. } => require_positive("sphere radius", radius)?,
            }
        }
        for r in &self.reactions {
            crate::error::require_non_negative("kappa", r.kappa)?;
            if r.reactant >= self.species.len() || r.product.is_some_and(|p| p >= self.species.len()) {
                return Err(domain!("reaction refers to a missing species"));
            }
        }
        self.flow.validate()
    }

    /// Whether `p` lies in the accessible domain (reflective spheres excluded).
    pub fn contains(&self, p: &SpacePoint) -> bool {
        let in_regions = self.regions.is_empty() || self.regions.iter().any(|r| r.contains(p));
        in_regions && !self.in_reflective_sphere(p)
    }

    fn in_reflective_sphere(&self, p: &SpacePoint) -> bool {
        self.surfaces.iter().any(|s| match (s.patch, s.behavior) {
            (Patch::Sphere { center, radius }, Behavior::Reflective) => (*p - center).norm_sq() < radius * radius,
            _ => false,
        })
    }

    fn region_of(&self, p: &SpacePoint) -> Option<usize> {
        self.regions.iter().position(|r| r.contains(p))
    }

    fn face_behavior(&self, region: usize, face: Face) -> (Behavior, Option<usize>) {
        for (i, s) in self.surfaces.iter().enumerate() {
            if let Patch::RegionFace { region: r, face: f } = s.patch {
                if r == region && f == face {
                    return (s.behavior, Some(i));
                }
            }
        }
        (self.default_behavior.unwrap_or(Behavior::Reflective), None)
    }

    /// Total accessible volume when regions do not overlap.
    pub fn region_volume(&self) -> f64 {
        self.regions.iter().map(Region::volume).sum()
    }

    /// Applies the boundary rules to a move from `old` (inside the domain) to `new`.
    ///
    /// Absorbing spheres use an endpoint-inside test. Reflective spheres revert the
    /// whole move. Region boundaries are resolved axis by axis in x, y, z order:
    /// each coordinate is applied in turn and, if that leaves the domain, the
    /// exited face of the current region decides between reverting the
    /// coordinate and absorbing the particle.
    pub fn resolve_move(&self, old: SpacePoint, new: SpacePoint) -> Result<MoveOutcome> {
        for (i, s) in self.surfaces.iter().enumerate() {
            if let Patch::Sphere { center, radius } = s.patch {
                if s.behavior == Behavior::Absorbing && (new - center).norm_sq() <= radius * radius {
                    return Ok(MoveOutcome::Absorbed(Some(i)));
                }
            }
        }
        if self.in_reflective_sphere(&new) {
            return Ok(MoveOutcome::Moved(old));
        }
        if self.regions.is_empty() || self.regions.iter().any(|r| r.contains(&new)) {
            return Ok(MoveOutcome::Moved(new));
        }
        let mut cur = old;
        for axis in 0..3 {
            let target = new.axis(axis);
            if target == cur.axis(axis) {
                continue;
            }
            let mut trial = cur;
            trial.set_axis(axis, target);
            if self.regions.iter().any(|r| r.contains(&trial)) {
                cur = trial;
                continue;
            }
            let region = self.region_of(&cur).ok_or_else(|| {
                Error::Geometry(format!("particle at {cur:?} lies outside every region"))
            })?;
            let face = self.regions[region].exit_face(axis, target - cur.axis(axis));
            match self.face_behavior(region, face) {
                (Behavior::Reflective, _) => {}
                (Behavior::Absorbing, idx) => return Ok(MoveOutcome::Absorbed(idx)),
                (Behavior::Transparent, _) => {
                    return Err(Error::Geometry(format!(
                        "transparent face {face:?} of region {region} leads outside the domain at {trial:?}"
                    )))
                }
            }
        }
        if self.regions.iter().any(|r| r.contains(&cur)) {
            Ok(MoveOutcome::Moved(cur))
        } else {
            Err(Error::Geometry(format!("unresolved move from {old:?} to {new:?}")))
        }
    }
}

/// Micrometers.
const UM: f64 = 1e-6;

/// Two cubes of edge 32 µm joined along x by a 12 µm × 12 µm pipe of length
/// `pipe_length`, returned with the index of the absorbing surface (the far
/// x face of the right cube). All other walls reflect.
pub fn build_dumbbell(pipe_length: f64, diffusion: f64) -> Result<(Environment, usize)> {
    require_positive("pipe_length", pipe_length)?;
    let edge = 32.0 * UM;
    let side = 12.0 * UM;
    let lo = 0.5 * (edge - side);
    let left = Region::Box { min: SpacePoint::ORIGIN, max: SpacePoint::new(edge, edge, edge) };
    let pipe = Region::Box {
        min: SpacePoint::new(edge, lo, lo),
        max: SpacePoint::new(edge + pipe_length, lo + side, lo + side),
    };
    let right = Region::Box {
        min: SpacePoint::new(edge + pipe_length, 0.0, 0.0),
        max: SpacePoint::new(2.0 * edge + pipe_length, edge, edge),
    };
    let env = Environment {
        regions: vec![left, pipe, right],
        surfaces: vec![Surface {
            patch: Patch::RegionFace { region: 2, face: Face::Box { axis: 0, upper: true } },
            behavior: Behavior::Absorbing,
        }],
        default_behavior: Some(Behavior::Reflective),
        flow: FlowField::None,
        species: vec![Species { name: "A".into(), diffusion }],
        reactions: Vec::new(),
    };
    env.validate()?;
    Ok((env, 0))
}

/// Default pipe length of the dumbbell, m.
pub const DUMBBELL_PIPE: f64 = 60.0 * UM;

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::VecDeque;

    #[test]
    fn dumbbell_volume() {
        let (env, _) = build_dumbbell(DUMBBELL_PIPE, 1e-10).unwrap();
        let expect = 2.0 * (32e-6f64).powi(3) + 144e-12 * 60e-6;
        assert!((env.region_volume() / expect - 1.0).abs() < 1e-12);
        assert!(build_dumbbell(0.0, 1e-10).is_err());
    }

    #[test]
    fn dumbbell_connected() {
        // Flood fill on a 1 µm voxel grid from the left cube center to the absorbing face.
        let (env, _) = build_dumbbell(DUMBBELL_PIPE, 1e-10).unwrap();
        let h = 1e-6;
        let (nx, ny, nz) = (124usize, 32usize, 32usize);
        let center = |i: usize, j: usize, k: usize| SpacePoint::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h, (k as f64 + 0.5) * h);
        let mut seen = vec![false; nx * ny * nz];
        let idx = |i: usize, j: usize, k: usize| (i * ny + j) * nz + k;
        let mut queue: VecDeque<(usize, usize, usize)> = VecDeque::from([(16, 16, 16)]);
        seen[idx(16, 16, 16)] = true;
        let mut reached = false;
        while let Some((i, j, k)) = queue.pop_front() {
            if i == nx - 1 {
                reached = true;
                break;
            }
            let nbrs = [
                (i.wrapping_sub(1), j, k),
                (i + 1, j, k),
                (i, j.wrapping_sub(1), k),
                (i, j + 1, k),
                (i, j, k.wrapping_sub(1)),
                (i, j, k + 1),
            ];
            for (a, b, c) in nbrs {
                if a < nx && b < ny && c < nz && !seen[idx(a, b, c)] && env.contains(&center(a, b, c)) {
                    seen[idx(a, b, c)] = true;
                    queue.push_back((a, b, c));
                }
            }
        }
        assert!(reached);
    }

    #[test]
    fn reflective_plane_reverts_normal_coordinate() {
        let env = Environment {
            regions: vec![Region::Box { min: SpacePoint::new(0.0, -1.0, -1.0), max: SpacePoint::new(1.0, 1.0, 1.0) }],
            default_behavior: Some(Behavior::Reflective),
            species: vec![Species { name: "A".into(), diffusion: 1.0 }],
            ..Default::default()
        };
        let out = env.resolve_move(SpacePoint::new(0.1, 0.0, 0.0), SpacePoint::new(-0.2, 0.3, 0.4)).unwrap();
        assert_eq!(out, MoveOutcome::Moved(SpacePoint::new(0.1, 0.3, 0.4)));
        // Corner: both x and y exit; both revert.
        let out = env.resolve_move(SpacePoint::new(0.1, 0.9, 0.0), SpacePoint::new(-0.2, 1.3, 0.4)).unwrap();
        assert_eq!(out, MoveOutcome::Moved(SpacePoint::new(0.1, 0.9, 0.4)));
    }

    #[test]
    fn absorbing_face_and_sphere() {
        let (env, idx) = build_dumbbell(DUMBBELL_PIPE, 1e-10).unwrap();
        let far = 124e-6;
        let out = env.resolve_move(SpacePoint::new(far - 1e-7, 16e-6, 16e-6), SpacePoint::new(far + 1e-7, 16e-6, 16e-6)).unwrap();
        assert_eq!(out, MoveOutcome::Absorbed(Some(idx)));
        let env = Environment {
            surfaces: vec![Surface {
                patch: Patch::Sphere { center: SpacePoint::ORIGIN, radius: 1.0 },
                behavior: Behavior::Absorbing,
            }],
            species: vec![Species { name: "A".into(), diffusion: 1.0 }],
            ..Default::default()
        };
        let out = env.resolve_move(SpacePoint::new(2.0, 0.0, 0.0), SpacePoint::new(0.5, 0.0, 0.0)).unwrap();
        assert_eq!(out, MoveOutcome::Absorbed(Some(0)));
    }

    #[test]
    fn pipe_entry_through_attached_face() {
        let (env, _) = build_dumbbell(DUMBBELL_PIPE, 1e-10).unwrap();
        let old = SpacePoint::new(31.9e-6, 16e-6, 16e-6);
        let new = SpacePoint::new(32.5e-6, 16.2e-6, 15.8e-6);
        assert_eq!(env.resolve_move(old, new).unwrap(), MoveOutcome::Moved(new));
        // Blocked by the cube wall outside the pipe mouth.
        let old = SpacePoint::new(31.9e-6, 2e-6, 2e-6);
        let new = SpacePoint::new(32.5e-6, 2.2e-6, 1.8e-6);
        assert_eq!(env.resolve_move(old, new).unwrap(), MoveOutcome::Moved(SpacePoint::new(31.9e-6, 2.2e-6, 1.8e-6)));
    }
}
