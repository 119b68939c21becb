//! Row-major per-pixel 3D point grids with confidence, plus the `PMAP`
//! binary file format.
//!
//! File layout, little-endian: magic `PMAP`, u32 version (1), u32 width,
//! u32 height, then height*width records of four f32 (x, y, z, confidence).
//! Invalid pixels carry confidence 0 and a zero point.

use nalgebra::Vector3;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"PMAP";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct PointMap {
    width: usize,
    height: usize,
    points: Vec<Vector3<f64>>,
    confidence: Vec<f64>,
}

impl PointMap {
    pub fn new(
        width: usize,
        height: usize,
        points: Vec<Vector3<f64>>,
        confidence: Vec<f64>,
    ) -> Result<Self> {
        let n = width * height;
        if width == 0 || height == 0 || points.len() != n || confidence.len() != n {
            return Err(Error::PmapFormat(format!(
                "buffer lengths {}/{} do not match {width}x{height}",
                points.len(),
                confidence.len()
            )));
        }
        for (i, (p, &c)) in points.iter().zip(&confidence).enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(Error::PmapFormat(format!("non-finite point at index {i}")));
            }
            if !c.is_finite() || !(0.0..=1.0).contains(&c) {
                return Err(Error::PmapFormat(format!("confidence {c} at index {i}")));
            }
        }
        Ok(PointMap { width, height, points, confidence })
    }

    /// All-invalid map (zero points, zero confidence).
    pub fn zeros(width: usize, height: usize) -> Self {
        PointMap {
            width,
            height,
            points: vec![Vector3::zeros(); width * height],
            confidence: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn idx(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.height && col < self.width);
        row * self.width + col
    }

    pub fn point(&self, row: usize, col: usize) -> Vector3<f64> {
        self.points[self.idx(row, col)]
    }

    pub fn confidence(&self, row: usize, col: usize) -> f64 {
        self.confidence[self.idx(row, col)]
    }

    pub fn is_valid(&self, row: usize, col: usize) -> bool {
        self.confidence(row, col) > 0.0
    }

    pub fn set(&mut self, row: usize, col: usize, point: Vector3<f64>, confidence: f64) {
        debug_assert!(confidence.is_finite() && (0.0..=1.0).contains(&confidence));
        let i = self.idx(row, col);
        self.points[i] = point;
        self.confidence[i] = confidence;
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn confidences(&self) -> &[f64] {
        &self.confidence
    }

    /// Diagonal of the axis-aligned box around all valid points; 0 when
    /// nothing is valid.
    pub fn bbox_diagonal(&self) -> f64 {
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        let mut any = false;
        for (p, &c) in self.points.iter().zip(&self.confidence) {
            if c > 0.0 {
                lo = lo.inf(p);
                hi = hi.sup(p);
                any = true;
            }
        }
        if any {
            (hi - lo).norm()
        } else {
            0.0
        }
    }
}

/// Errors unless both maps share one resolution.
pub fn check_same_resolution(a: &PointMap, b: &PointMap) -> Result<()> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::ResolutionMismatch {
            w0: a.width,
            h0: a.height,
            w1: b.width,
            h1: b.height,
        });
    }
    Ok(())
}

pub fn write_pmap<W: Write>(map: &PointMap, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(map.width as u32).to_le_bytes())?;
    w.write_all(&(map.height as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(map.points.len() * 16);
    for (p, &c) in map.points.iter().zip(&map.confidence) {
        for v in [p.x, p.y, p.z, c] {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_pmap<R: Read>(mut r: R) -> Result<PointMap> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head)
        .map_err(|_| Error::PmapFormat("truncated header".to_string()))?;
    if &head[0..4] != MAGIC {
        return Err(Error::PmapFormat(format!("bad magic {:?}", &head[0..4])));
    }
    let word = |i: usize| u32::from_le_bytes(head[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != VERSION {
        return Err(Error::PmapFormat(format!("unsupported version {version}")));
    }
    let width = word(8) as usize;
    let height = word(12) as usize;
    let n = width
        .checked_mul(height)
        .filter(|&n| n > 0 && n <= 1 << 28)
        .ok_or_else(|| Error::PmapFormat(format!("bad dimensions {width}x{height}")))?;

    let mut body = vec![0u8; n * 16];
    r.read_exact(&mut body)
        .map_err(|_| Error::PmapFormat("truncated pixel data".to_string()))?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::PmapFormat("trailing bytes after pixel data".to_string()));
    }

    let mut points = Vec::with_capacity(n);
    let mut confidence = Vec::with_capacity(n);
    for i in 0..n {
        let f = |k: usize| -> f64 {
            let o = i * 16 + k * 4;
            f32::from_le_bytes(body[o..o + 4].try_into().unwrap()) as f64
        };
        points.push(Vector3::new(f(0), f(1), f(2)));
        confidence.push(f(3));
    }
    PointMap::new(width, height, points, confidence)
}

pub fn save_pmap(map: &PointMap, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_pmap(map, std::io::BufWriter::new(file))
}

pub fn load_pmap(path: &Path) -> Result<PointMap> {
    let file = std::fs::File::open(path)?;
    read_pmap(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_map() -> PointMap {
        let mut m = PointMap::zeros(3, 2);
        m.set(0, 0, Vector3::new(0.1, -0.2, 0.3), 1.0);
        m.set(0, 2, Vector3::new(1.5, 2.5, -3.5), 0.7);
        m.set(1, 1, Vector3::new(-0.25, 0.5, 0.125), 0.4);
        m
    }

    #[test]
    fn round_trip_preserves_values_at_f32_precision() {
        let m = sample_map();
        let mut bytes = Vec::new();
        write_pmap(&m, &mut bytes).unwrap();
        assert_eq!(&bytes[0..4], b"PMAP");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 2);
        assert_eq!(bytes.len(), 16 + 6 * 16);

        let back = read_pmap(bytes.as_slice()).unwrap();
        assert_eq!(back.width(), 3);
        assert_eq!(back.height(), 2);
        for r in 0..2 {
            for c in 0..3 {
                let (p0, p1) = (m.point(r, c), back.point(r, c));
                assert!((p0 - p1).norm() <= 1e-7 * (1.0 + p0.norm()));
                assert!((m.confidence(r, c) - back.confidence(r, c)).abs() <= 1e-7);
            }
        }

        // Serialization is byte-stable.
        let mut again = Vec::new();
        write_pmap(&back, &mut again).unwrap();
        assert_eq!(bytes, again);
    }

    #[test]
    fn invalid_pixels_are_exact_zeros() {
        let m = sample_map();
        let mut bytes = Vec::new();
        write_pmap(&m, &mut bytes).unwrap();
        // Pixel (0, 1) was never set: 16 zero bytes.
        let off = 16 + 16;
        assert_eq!(&bytes[off..off + 16], &[0u8; 16]);
        let back = read_pmap(bytes.as_slice()).unwrap();
        assert!(!back.is_valid(0, 1));
        assert_eq!(back.point(0, 1), Vector3::zeros());
    }

    #[test]
    fn rejects_corrupt_streams() {
        let m = sample_map();
        let mut bytes = Vec::new();
        write_pmap(&m, &mut bytes).unwrap();

        let expect_fmt = |data: &[u8]| {
            assert!(matches!(read_pmap(data), Err(Error::PmapFormat(_))));
        };
        expect_fmt(&bytes[..10]); // truncated header
        expect_fmt(&bytes[..30]); // truncated body
        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'Q';
        expect_fmt(&bad_magic);
        let mut bad_version = bytes.clone();
        bad_version[4] = 9;
        expect_fmt(&bad_version);
        let mut trailing = bytes.clone();
        trailing.push(0);
        expect_fmt(&trailing);
        let mut bad_conf = bytes.clone();
        // Overwrite first confidence with 2.0f32.
        bad_conf[16 + 12..16 + 16].copy_from_slice(&2.0f32.to_le_bytes());
        expect_fmt(&bad_conf);
    }

    #[test]
    fn construction_validates_shape_and_values() {
        assert!(PointMap::new(2, 2, vec![Vector3::zeros(); 3], vec![0.0; 4]).is_err());
        assert!(PointMap::new(0, 2, vec![], vec![]).is_err());
        assert!(PointMap::new(
            1,
            1,
            vec![Vector3::new(f64::NAN, 0.0, 0.0)],
            vec![1.0]
        )
        .is_err());
        assert!(PointMap::new(1, 1, vec![Vector3::zeros()], vec![1.5]).is_err());
    }

    #[test]
    fn resolution_check_and_bbox() {
        let a = PointMap::zeros(4, 3);
        let b = PointMap::zeros(4, 4);
        assert!(matches!(
            check_same_resolution(&a, &b),
            Err(Error::ResolutionMismatch { .. })
        ));
        assert_eq!(a.bbox_diagonal(), 0.0);

        let mut m = PointMap::zeros(2, 1);
        m.set(0, 0, Vector3::new(0.0, 0.0, 0.0), 1.0);
        m.set(0, 1, Vector3::new(3.0, 4.0, 0.0), 1.0);
        assert!((m.bbox_diagonal() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.pmap");
        let m = sample_map();
        save_pmap(&m, &path).unwrap();
        let back = load_pmap(&path).unwrap();
        assert_eq!(back.width(), m.width());
        assert!((back.point(1, 1) - m.point(1, 1)).norm() < 1e-7);
    }
}
