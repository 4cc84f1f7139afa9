//! Deterministic software ray tracer over flattened primitives.
//!
//! One ray per pixel through the pixel center. Shaded mode is Lambertian
//! with a single directional light; the map modes write a label per pixel
//! (0 is background) and a false-color RGB image alongside.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::math::{Matrix4, Vector3};
use crate::scene::{Aabb, FlatPrimitive, Geometry, Word};

pub const HIT_EPSILON: f64 = 1e-6;
const TIE_EPSILON: f64 = 1e-12;
const AMBIENT: f64 = 0.1;
const LIGHT_INTENSITY: f64 = 0.9;
const SHADED_BACKGROUND: [u8; 3] = [242, 242, 242];
const MAP_BACKGROUND: [u8; 3] = [0, 0, 0];

/// Environment variable capping render parallelism.
pub const THREADS_ENV: &str = "SCENELANG_THREADS";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Projection {
    /// Vertical field of view in radians.
    Perspective { fov_y: f64 },
    /// Full visible height in world units.
    Orthographic { height: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Camera {
    position: Vector3,
    look_at: Vector3,
    up: Vector3,
    projection: Projection,
    width: u32,
    height: u32,
    #[serde(skip)]
    basis: [Vector3; 3],
}

impl Camera {
    pub fn new(
        position: Vector3,
        look_at: Vector3,
        up: Vector3,
        projection: Projection,
        width: u32,
        height: u32,
    ) -> Result<Camera, RenderError> {
        let bad = |m: &str| Err(RenderError::InvalidCamera(m.to_string()));
        if !(position.is_finite() && look_at.is_finite() && up.is_finite()) {
            return bad("camera vectors must be finite");
        }
        if width == 0 || height == 0 {
            return bad("image width and height must be at least 1");
        }
        match projection {
            Projection::Perspective { fov_y } if !(fov_y > 0.0 && fov_y < std::f64::consts::PI) => {
                return bad("perspective field of view must lie in (0, pi)")
            }
            Projection::Orthographic { height } if !(height > 0.0 && height.is_finite()) => {
                return bad("orthographic height must be positive")
            }
            _ => {}
        }
        let Some(forward) = (look_at - position).normalized() else {
            return bad("position and look_at coincide");
        };
        let Some(right) = forward.cross(up).normalized().filter(|_| forward.cross(up).norm() > 1e-9 * up.norm()) else {
            return bad("up vector is parallel to the view direction");
        };
        let true_up = right.cross(forward);
        Ok(Camera {
            position,
            look_at,
            up,
            projection,
            width,
            height,
            basis: [right, true_up, forward],
        })
    }

    pub fn perspective(position: Vector3, look_at: Vector3, up: Vector3, fov_y: f64, width: u32, height: u32) -> Result<Camera, RenderError> {
        Camera::new(position, look_at, up, Projection::Perspective { fov_y }, width, height)
    }

    pub fn orthographic(position: Vector3, look_at: Vector3, up: Vector3, view_height: f64, width: u32, height: u32) -> Result<Camera, RenderError> {
        Camera::new(position, look_at, up, Projection::Orthographic { height: view_height }, width, height)
    }

    /// Perspective camera looking at the center of `bounds` from the
    /// (3, 3, 5) direction, far enough that the bounds padded by 10% fit the
    /// view. `None` bounds frame the unit cube at the origin.
    pub fn auto_frame(bounds: Option<Aabb>, width: u32, height: u32) -> Camera {
        let fov_y = 40f64.to_radians();
        let bounds = bounds.unwrap_or(Aabb::new(Vector3::splat(-0.5), Vector3::splat(0.5)));
        let center = bounds.center();
        let radius = (bounds.sizes().norm() * 0.5 * 1.1).max(1e-3);
        let aspect = width as f64 / height as f64;
        let half = (fov_y / 2.0).tan().min((fov_y / 2.0).tan() * aspect).atan();
        let distance = radius / half.sin();
        let dir = Vector3::new(3.0, 3.0, 5.0).normalized().expect("nonzero");
        Camera::perspective(center + dir * distance, center, Vector3::Y, fov_y, width, height)
            .expect("auto-framed camera is valid")
    }

    pub fn with_size(&self, width: u32, height: u32) -> Result<Camera, RenderError> {
        Camera::new(self.position, self.look_at, self.up, self.projection, width, height)
    }

    pub fn position(&self) -> Vector3 {
        self.position
    }

    pub fn look_at(&self) -> Vector3 {
        self.look_at
    }

    pub fn up(&self) -> Vector3 {
        self.up
    }

    pub fn projection(&self) -> Projection {
        self.projection
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn forward(&self) -> Vector3 {
        self.basis[2]
    }

    fn aspect(&self) -> f64 {
        self.width as f64 / self.height as f64
    }

    /// Primary ray through the center of pixel `(x, y)`, `y` counted from
    /// the top row.
    pub fn ray(&self, x: u32, y: u32) -> (Vector3, Vector3) {
        let [right, up, forward] = self.basis;
        let sx = (2.0 * (x as f64 + 0.5) / self.width as f64 - 1.0) * self.aspect();
        let sy = 1.0 - 2.0 * (y as f64 + 0.5) / self.height as f64;
        match self.projection {
            Projection::Perspective { fov_y } => {
                let k = (fov_y / 2.0).tan();
                let d = forward + right * (sx * k) + up * (sy * k);
                (self.position, d.normalized().expect("nonzero ray"))
            }
            Projection::Orthographic { height } => {
                let h = height / 2.0;
                (self.position + right * (sx * h) + up * (sy * h), forward)
            }
        }
    }

    /// Camera-frame coordinates `(right, up, depth)` of a world point.
    fn to_view(&self, p: Vector3) -> Vector3 {
        let d = p - self.position;
        Vector3::new(d.dot(self.basis[0]), d.dot(self.basis[1]), d.dot(self.basis[2]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RenderMode {
    #[default]
    Shaded,
    Semantic,
    Instance,
    Correspondence,
    Depth,
}

impl RenderMode {
    pub const ALL: [RenderMode; 5] = [
        RenderMode::Shaded,
        RenderMode::Semantic,
        RenderMode::Instance,
        RenderMode::Correspondence,
        RenderMode::Depth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RenderMode::Shaded => "shaded",
            RenderMode::Semantic => "semantic",
            RenderMode::Instance => "instance",
            RenderMode::Correspondence => "correspondence",
            RenderMode::Depth => "depth",
        }
    }

    pub fn has_labels(self) -> bool {
        matches!(self, RenderMode::Semantic | RenderMode::Instance | RenderMode::Correspondence)
    }
}

impl std::str::FromStr for RenderMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        RenderMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown render mode `{s}`"))
    }
}

/// A rendered image. Map modes also carry one label per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    /// Row-major RGB, 3 bytes per pixel.
    pub rgb: Vec<u8>,
    pub labels: Option<Vec<u32>>,
}

impl Image {
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }

    pub fn label(&self, x: u32, y: u32) -> Option<u32> {
        self.labels.as_ref().map(|l| l[y as usize * self.width as usize + x as usize])
    }

    /// Binary PPM (P6).
    pub fn write_ppm(&self, w: &mut impl Write) -> io::Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.rgb)
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.rgb.len() + 20);
        self.write_ppm(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    /// `{width, height, labels}`; `None` for images without labels.
    pub fn labels_json(&self) -> Option<String> {
        #[derive(Serialize)]
        struct LabelMap<'a> {
            width: u32,
            height: u32,
            labels: &'a [u32],
        }
        self.labels.as_ref().map(|labels| {
            serde_json::to_string(&LabelMap {
                width: self.width,
                height: self.height,
                labels,
            })
            .expect("label map serializes")
        })
    }
}

/// Parses a binary PPM written by [`Image::write_ppm`].
pub fn read_ppm(bytes: &[u8]) -> Option<Image> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return None;
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).ok()?);
    }
    if fields[0] != "P6" || fields[3] != "255" {
        return None;
    }
    let width: u32 = fields[1].parse().ok()?;
    let height: u32 = fields[2].parse().ok()?;
    let rgb = bytes.get(pos + 1..)?.to_vec();
    (rgb.len() == 3 * width as usize * height as usize).then_some(Image {
        width,
        height,
        rgb,
        labels: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    /// Unit world-space normal.
    pub normal: Vector3,
}

/// A primitive with its inverse pose and world bounds precomputed.
#[derive(Debug, Clone)]
struct Prepared<'a> {
    prim: &'a FlatPrimitive,
    inverse: Matrix4,
    bounds: Aabb,
}

impl<'a> Prepared<'a> {
    fn new(prim: &'a FlatPrimitive) -> Option<Self> {
        let inverse = prim.world.invert().ok()?;
        Some(Prepared {
            prim,
            inverse,
            bounds: prim.spec.world_aabb(&prim.world),
        })
    }

    fn intersect(&self, origin: Vector3, dir: Vector3) -> Option<Hit> {
        slab(origin, dir, self.bounds.min, self.bounds.max)?;
        let o = self.inverse.apply_point(origin);
        let d = self.inverse.apply_vector(dir);
        let (t, n) = local_hit(&self.prim.spec.geometry, o, d)?;
        let normal = self.inverse.apply_transpose_vector(n).normalized()?;
        Some(Hit { t, normal })
    }
}

/// Entry and exit distances of a ray through an axis-aligned box, exiting
/// after `HIT_EPSILON`, with the axis index and sign of the entry face.
fn slab(o: Vector3, d: Vector3, lo: Vector3, hi: Vector3) -> Option<(f64, f64, usize, f64, usize, f64)> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    let (mut enter_axis, mut enter_sign) = (0, -1.0);
    let (mut exit_axis, mut exit_sign) = (0, 1.0);
    for a in 0..3 {
        if d[a] == 0.0 {
            if o[a] < lo[a] || o[a] > hi[a] {
                return None;
            }
            continue;
        }
        let inv = 1.0 / d[a];
        let (mut near, mut far) = ((lo[a] - o[a]) * inv, (hi[a] - o[a]) * inv);
        let mut sign = -1.0;
        if near > far {
            std::mem::swap(&mut near, &mut far);
            sign = 1.0;
        }
        if near > t0 {
            t0 = near;
            enter_axis = a;
            enter_sign = sign;
        }
        if far < t1 {
            t1 = far;
            exit_axis = a;
            exit_sign = -sign;
        }
    }
    (t0 <= t1 && t1 > HIT_EPSILON).then_some((t0, t1, enter_axis, enter_sign, exit_axis, exit_sign))
}

fn axis_normal(axis: usize, sign: f64) -> Vector3 {
    let mut n = [0.0; 3];
    n[axis] = sign;
    Vector3::new(n[0], n[1], n[2])
}

fn box_hit(o: Vector3, d: Vector3, lo: Vector3, hi: Vector3) -> Option<(f64, Vector3)> {
    let (t0, t1, ea, es, xa, xs) = slab(o, d, lo, hi)?;
    if t0 > HIT_EPSILON {
        Some((t0, axis_normal(ea, es)))
    } else {
        Some((t1, axis_normal(xa, xs)))
    }
}

/// Smallest root of `a t² + b t + c` greater than `HIT_EPSILON`.
fn quadratic_roots(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    if a == 0.0 {
        return None;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    // Numerically stable form.
    let q = -0.5 * (b + b.signum() * s);
    let (r0, r1) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    Some((r0.min(r1), r0.max(r1)))
}

/// Nearest hit in local coordinates; `d` need not be unit length, so the
/// returned `t` is the world distance along the original unit ray.
fn local_hit(g: &Geometry, o: Vector3, d: Vector3) -> Option<(f64, Vector3)> {
    match g {
        Geometry::Cube { size } => box_hit(o, d, -*size / 2.0, *size / 2.0),
        Geometry::Cuboid { size, .. } => box_hit(
            o,
            d,
            Vector3::ZERO,
            Vector3::new(size[0] as f64, size[1] as f64, size[2] as f64),
        ),
        Geometry::Sphere { radius } => {
            let (t0, t1) = quadratic_roots(d.dot(d), 2.0 * o.dot(d), o.dot(o) - radius * radius)?;
            let t = if t0 > HIT_EPSILON { t0 } else { t1 };
            (t > HIT_EPSILON).then(|| (t, o + d * t))
        }
        Geometry::Cylinder { radius, p0, p1 } => cylinder_hit(o, d, *radius, *p0, *p1),
    }
}

fn cylinder_hit(o: Vector3, d: Vector3, r: f64, p0: Vector3, p1: Vector3) -> Option<(f64, Vector3)> {
    let axis = p1 - p0;
    let len = axis.norm();
    let a = axis / len;
    let w = o - p0;
    let dp = d - a * d.dot(a);
    let wp = w - a * w.dot(a);
    let mut best: Option<(f64, Vector3)> = None;
    let mut consider = |t: f64, n: Vector3| {
        if t > HIT_EPSILON && best.is_none_or(|(bt, _)| t < bt) {
            best = Some((t, n));
        }
    };
    if let Some((t0, t1)) = quadratic_roots(dp.dot(dp), 2.0 * dp.dot(wp), wp.dot(wp) - r * r) {
        for t in [t0, t1] {
            let h = (w + d * t).dot(a);
            if (0.0..=len).contains(&h) {
                consider(t, wp + dp * t);
            }
        }
    }
    let da = d.dot(a);
    if da != 0.0 {
        for (center, n) in [(p0, -a), (p1, a)] {
            let t = (center - o).dot(a) / da;
            let q = o + d * t - center;
            if q.dot(q) <= r * r {
                consider(t, n);
            }
        }
    }
    best
}

/// Nearest intersection of a unit-direction ray with a posed primitive.
pub fn intersect_ray_primitive(origin: Vector3, dir: Vector3, prim: &FlatPrimitive) -> Option<Hit> {
    Prepared::new(prim)?.intersect(origin, dir)
}

/// 32-bit FNV-1a of the word text, never 0.
pub fn semantic_label(word: &Word) -> u32 {
    let mut h: u32 = 0x811c_9dc5;
    for b in word.as_str().bytes() {
        h ^= b as u32;
        h = h.wrapping_mul(0x0100_0193);
    }
    h.max(1)
}

fn hsv(h: f64, s: f64, v: f64) -> [u8; 3] {
    let h6 = h.rem_euclid(1.0) * 6.0;
    let i = h6.floor();
    let f = h6 - i;
    let (p, q, t) = (v * (1.0 - s), v * (1.0 - s * f), v * (1.0 - s * (1.0 - f)));
    let (r, g, b) = match i as u32 % 6 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [to_byte(r), to_byte(g), to_byte(b)]
}

fn to_byte(c: f64) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// False color for an id label: golden-ratio hue stepping.
pub fn id_color(id: u32) -> [u8; 3] {
    if id == 0 {
        return MAP_BACKGROUND;
    }
    let golden = 0.618_033_988_749_894_9;
    let level = [0.95, 0.75, 0.55][(id / 7 % 3) as usize];
    hsv(id as f64 * golden, 0.7, level)
}

/// False color for a semantic label, taken from the hash bits.
pub fn semantic_color(label: u32) -> [u8; 3] {
    if label == 0 {
        return MAP_BACKGROUND;
    }
    let hue = (label & 0xffff) as f64 / 65536.0;
    let sat = 0.5 + 0.4 * ((label >> 16 & 0xff) as f64 / 255.0);
    let val = 0.6 + 0.35 * ((label >> 24) as f64 / 255.0);
    hsv(hue, sat, val)
}

fn light_direction() -> Vector3 {
    Vector3::ONE.normalized().expect("nonzero")
}

/// Runs `f` on a pool sized by `SCENELANG_THREADS` when set.
pub fn with_render_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok());
    match threads.filter(|&n| n > 0) {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

struct PixelHit {
    t: f64,
    normal: Vector3,
    dir: Vector3,
    index: usize,
}

fn trace(prims: &[Prepared<'_>], origin: Vector3, dir: Vector3) -> Option<PixelHit> {
    let mut best: Option<PixelHit> = None;
    for (index, p) in prims.iter().enumerate() {
        let Some(hit) = p.intersect(origin, dir) else { continue };
        let better = match &best {
            None => true,
            Some(b) => {
                hit.t < b.t - TIE_EPSILON
                    || ((hit.t - b.t).abs() <= TIE_EPSILON
                        && p.prim.embedding_id < prims[b.index].prim.embedding_id)
            }
        };
        if better {
            best = Some(PixelHit {
                t: hit.t,
                normal: hit.normal,
                dir,
                index,
            });
        }
    }
    best
}

/// Renders the primitives. Output is independent of thread count.
pub fn render(prims: &[FlatPrimitive], camera: &Camera, mode: RenderMode) -> Image {
    let prepared: Vec<Prepared<'_>> = prims.iter().filter_map(Prepared::new).collect();
    let (w, h) = (camera.width, camera.height);
    let hits: Vec<Option<PixelHit>> = with_render_pool(|| {
        (0..w as usize * h as usize)
            .into_par_iter()
            .with_min_len(w as usize)
            .map(|i| {
                let (origin, dir) = camera.ray((i % w as usize) as u32, (i / w as usize) as u32);
                trace(&prepared, origin, dir)
            })
            .collect()
    });

    let mut rgb = Vec::with_capacity(hits.len() * 3);
    let mut labels = mode.has_labels().then(|| Vec::with_capacity(hits.len()));
    match mode {
        RenderMode::Shaded => {
            let l = light_direction();
            for hit in &hits {
                let px = match hit {
                    None => SHADED_BACKGROUND,
                    Some(hit) => {
                        let n = if hit.normal.dot(hit.dir) > 0.0 { -hit.normal } else { hit.normal };
                        let k = AMBIENT + LIGHT_INTENSITY * n.dot(l).max(0.0);
                        let c = prepared[hit.index].prim.spec.color;
                        [to_byte(c[0] * k), to_byte(c[1] * k), to_byte(c[2] * k)]
                    }
                };
                rgb.extend_from_slice(&px);
            }
        }
        RenderMode::Depth => {
            let inv: Vec<Option<f64>> = hits.iter().map(|h| h.as_ref().map(|h| 1.0 / h.t)).collect();
            let lo = inv.iter().flatten().copied().fold(f64::INFINITY, f64::min);
            let hi = inv.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
            for v in &inv {
                let g = match v {
                    None => 0,
                    Some(v) if hi > lo => to_byte(0.15 + 0.85 * (v - lo) / (hi - lo)),
                    Some(_) => 255,
                };
                rgb.extend_from_slice(&[g, g, g]);
            }
        }
        RenderMode::Semantic | RenderMode::Instance | RenderMode::Correspondence => {
            let out = labels.as_mut().expect("label modes allocate labels");
            for hit in &hits {
                let label = match hit {
                    None => 0,
                    Some(hit) => {
                        let p = prepared[hit.index].prim;
                        match mode {
                            RenderMode::Semantic => semantic_label(&p.word),
                            RenderMode::Instance => p.embedding_id,
                            _ => p.group_id,
                        }
                    }
                };
                out.push(label);
                rgb.extend_from_slice(&if mode == RenderMode::Semantic {
                    semantic_color(label)
                } else {
                    id_color(label)
                });
            }
        }
    }
    Image {
        width: w,
        height: h,
        rgb,
        labels,
    }
}

/// Axis-aligned 2D box of a primitive in normalized image coordinates,
/// y pointing down.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutBox {
    pub label: Word,
    pub embedding_id: u32,
    /// `[x_min, y_min, x_max, y_max]`
    pub rect: [f64; 4],
}

/// Projects each primitive's world bounding box into the image. Boxes fully
/// behind the camera are dropped and reported in the returned warnings.
pub fn project_layout(prims: &[FlatPrimitive], camera: &Camera) -> (Vec<LayoutBox>, Vec<String>) {
    let mut boxes = Vec::new();
    let mut warnings = Vec::new();
    let aspect = camera.aspect();
    for p in prims {
        let corners = p.spec.world_aabb(&p.world).corners();
        let mut uv: Vec<(f64, f64)> = Vec::with_capacity(8);
        for c in corners {
            let v = camera.to_view(c);
            match camera.projection {
                Projection::Perspective { fov_y } => {
                    if v.z <= HIT_EPSILON {
                        continue;
                    }
                    let k = (fov_y / 2.0).tan();
                    uv.push((0.5 + v.x / v.z / (2.0 * k * aspect), 0.5 - v.y / v.z / (2.0 * k)));
                }
                Projection::Orthographic { height } => {
                    if v.z < 0.0 {
                        continue;
                    }
                    uv.push((0.5 + v.x / (height * aspect), 0.5 - v.y / height));
                }
            }
        }
        if uv.is_empty() {
            warnings.push(format!(
                "primitive \"{}\" (embedding id {}) is behind the camera; omitted from layout",
                p.word, p.embedding_id
            ));
            continue;
        }
        let clamp = |x: f64| x.clamp(0.0, 1.0);
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (u, v) in uv {
            x0 = x0.min(u);
            y0 = y0.min(v);
            x1 = x1.max(u);
            y1 = y1.max(v);
        }
        boxes.push(LayoutBox {
            label: p.word.clone(),
            embedding_id: p.embedding_id,
            rect: [clamp(x0), clamp(y0), clamp(x1), clamp(y1)],
        });
    }
    (boxes, warnings)
}

/// Union of the world bounds of `prims`.
pub fn primitives_bounds(prims: &[FlatPrimitive]) -> Option<Aabb> {
    prims
        .iter()
        .map(|p| p.spec.world_aabb(&p.world))
        .reduce(|a, b| a.union(&b))
}

pub fn layout_json(boxes: &[LayoutBox]) -> String {
    serde_json::to_string_pretty(boxes).expect("layout serializes")
}
