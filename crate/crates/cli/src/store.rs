//! On-disk sessions. The directory is the only state:
//!
//! ```text
//! session.json            summary, config, per-crop status
//! source.png
//! crops/{id}.png          crop on white, plus {id}_mask.png and {id}.json
//! seeds/{id}.json         last submitted seed set, plus {id}_labels.png
//! separated/{crop}_{label}.png, _mask.png, .json
//! scores.json             scores file
//! assignment.json         crop id -> class, provenance
//! distribution.json       moves and residuals of the last distribute
//! karyogram.json / karyogram.png
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use base64::Engine;
use karyoseg::classify::{
    argmax_assign, distribute, expected_counts, Assignment, AssignmentSource, ClassLabel, DistributionReport,
    FileScoreProvider, GeometricScoreProvider, Residual, ScoreMatrix, ScoreProvider, ScoresFile,
};
use karyoseg::imgcore::{decode_image, encode_png, load_image, load_mask};
use karyoseg::overlap::{analyze_mask, classify_crop, CropAnalysis};
use karyoseg::segmentation::{extract_objects, CropMeta};
use karyoseg::watershed::{segment_crop, separate, BaselineGapFiller, Method, SeedRole, SeedSet, SeparatedMeta};
use karyoseg::{CropKind, CropRecord, GrayImage, PipelineConfig, Pos, RotatedRect};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ErrorBody, ServiceError, ServiceResult};
use crate::render;

pub const SESSION_FILE: &str = "session.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CropStatus {
    Pending,
    Seeded,
    Separated,
    Classified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropEntry {
    pub id: String,
    pub kind: CropKind,
    pub status: CropStatus,
    pub offset: Pos,
    pub width: usize,
    pub height: usize,
    pub area: usize,
    pub bbox: RotatedRect,
    #[serde(default)]
    pub separated: Vec<String>,
}

impl CropEntry {
    fn advance(&mut self, to: CropStatus) {
        self.status = self.status.max(to);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub id: String,
    pub source: String,
    pub config: PipelineConfig,
    /// Pipeline failure recorded at creation (e.g. a degenerate histogram).
    pub error: Option<ErrorBody>,
    pub crops: Vec<CropEntry>,
    pub has_scores: bool,
    pub has_assignment: bool,
}

/// A unit of the karyogram: an unseparated crop or a separated chromosome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    pub parent: String,
    pub separated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionStat {
    pub label: u32,
    pub role: SeedRole,
    pub area: usize,
}

/// Watershed preview: raw labels (row-major), per-label areas and the label
/// raster as a base64 PNG (gray value = label).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedPreview {
    pub crop: String,
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub regions: Vec<RegionStat>,
    pub png: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatedItem {
    #[serde(flatten)]
    pub meta: SeparatedMeta,
    pub png: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KaryogramItem {
    pub id: String,
    pub provenance: AssignmentSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KaryogramRow {
    pub class: ClassLabel,
    pub items: Vec<KaryogramItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Karyogram {
    pub classes: usize,
    pub rows: Vec<KaryogramRow>,
    pub residuals: Vec<Residual>,
    pub declared_residual: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOutcome {
    pub assignment: Assignment,
    pub distribution: Option<DistributionReport>,
}

pub fn b64(bytes: &[u8]) -> String {
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

/// Content-derived session id: first 16 hex digits of
/// SHA-256(image bytes || canonical config JSON).
pub fn session_id(image: &[u8], config: &PipelineConfig) -> String {
    let mut h = Sha256::new();
    h.update(image);
    h.update(serde_json::to_vec(config).expect("config serialises"));
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Ids used as path components: ASCII letters, digits, `_` and `-`.
pub fn check_id(id: &str) -> ServiceResult<()> {
    if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        return Err(ServiceError::not_found(format!("no such id `{id}`")));
    }
    Ok(())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> ServiceResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> ServiceResult<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> ServiceResult<T> {
    let bytes = fs::read(path)?;
    Ok(serde_json::from_slice(&bytes)?)
}

fn save_gray(path: &Path, img: &GrayImage) -> ServiceResult<()> {
    write_atomic(path, &encode_png(img)?)
}

fn save_mask(path: &Path, mask: &karyoseg::BinaryMask) -> ServiceResult<()> {
    save_gray(path, &mask.to_gray(255, 0))
}

pub struct Session {
    dir: PathBuf,
    pub info: SessionInfo,
}

impl Session {
    /// Runs extraction and overlap screening and writes a new session into
    /// `dir`. Undecodable input fails before anything is written; an Otsu
    /// failure is recorded in the session.
    pub fn create(dir: &Path, image_bytes: &[u8], config: PipelineConfig) -> ServiceResult<Session> {
        config.validate()?;
        let image = decode_image(image_bytes)?;
        let fresh = !dir.exists();
        let result = Self::populate(dir, &image, image_bytes, config);
        if result.is_err() && fresh {
            let _ = fs::remove_dir_all(dir);
        }
        result
    }

    fn populate(dir: &Path, image: &GrayImage, image_bytes: &[u8], config: PipelineConfig) -> ServiceResult<Session> {
        let id = session_id(image_bytes, &config);
        fs::create_dir_all(dir)?;
        save_gray(&dir.join("source.png"), image)?;
        let (crops, error) = match extract_objects(image, &config) {
            Ok(c) => (c, None),
            Err(e @ karyoseg::Error::DegenerateHistogram) => {
                (Vec::new(), Some(ErrorBody { code: e.code().into(), message: e.to_string() }))
            }
            Err(e) => return Err(e.into()),
        };
        let mut entries = Vec::with_capacity(crops.len());
        for mut crop in crops {
            classify_crop(&mut crop, &config)?;
            let meta = crop.meta();
            save_gray(&dir.join("crops").join(format!("{}.png", crop.id)), &crop.image)?;
            save_mask(&dir.join("crops").join(format!("{}_mask.png", crop.id)), &crop.mask)?;
            write_json(&dir.join("crops").join(format!("{}.json", crop.id)), &meta)?;
            entries.push(CropEntry {
                id: meta.id,
                kind: meta.kind,
                status: CropStatus::Pending,
                offset: meta.offset,
                width: meta.width,
                height: meta.height,
                area: meta.area,
                bbox: meta.bbox,
                separated: Vec::new(),
            });
        }
        let session = Session {
            dir: dir.to_path_buf(),
            info: SessionInfo {
                id,
                source: "source.png".into(),
                config,
                error,
                crops: entries,
                has_scores: false,
                has_assignment: false,
            },
        };
        session.save()?;
        Ok(session)
    }

    pub fn exists(dir: &Path) -> bool {
        dir.join(SESSION_FILE).is_file()
    }

    pub fn open(dir: &Path) -> ServiceResult<Session> {
        if !Self::exists(dir) {
            return Err(ServiceError::not_found(format!("no session at {}", dir.display())));
        }
        Ok(Session { dir: dir.to_path_buf(), info: read_json(&dir.join(SESSION_FILE))? })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn save(&self) -> ServiceResult<()> {
        write_json(&self.dir.join(SESSION_FILE), &self.info)
    }

    fn entry_index(&self, cid: &str) -> ServiceResult<usize> {
        self.info
            .crops
            .iter()
            .position(|c| c.id == cid)
            .ok_or_else(|| ServiceError::not_found(format!("no crop `{cid}` in session {}", self.info.id)))
    }

    pub fn crop_path(&self, cid: &str) -> ServiceResult<PathBuf> {
        self.entry_index(cid)?;
        Ok(self.dir.join("crops").join(format!("{cid}.png")))
    }

    pub fn crop_mask_path(&self, cid: &str) -> ServiceResult<PathBuf> {
        self.entry_index(cid)?;
        Ok(self.dir.join("crops").join(format!("{cid}_mask.png")))
    }

    pub fn crop(&self, cid: &str) -> ServiceResult<CropRecord> {
        let i = self.entry_index(cid)?;
        let crops = self.dir.join("crops");
        let meta: CropMeta = read_json(&crops.join(format!("{cid}.json")))?;
        Ok(CropRecord {
            id: meta.id,
            image: load_image(crops.join(format!("{cid}.png")))?,
            mask: load_mask(crops.join(format!("{cid}_mask.png")))?,
            offset: self.info.crops[i].offset,
            bbox: meta.bbox,
            kind: meta.kind,
        })
    }

    /// Skeleton analysis of a crop and an RGB overlay (skeleton red, branch
    /// points green).
    pub fn inspect(&self, cid: &str) -> ServiceResult<(CropAnalysis, Vec<u8>)> {
        let crop = self.crop(cid)?;
        let c = &self.info.config;
        let analysis = analyze_mask(&crop.mask, c.merge_radius, c.spur_ratio)?;
        let png = render::skeleton_overlay(&crop.image, &analysis)?;
        Ok((analysis, png))
    }

    fn seeds_path(&self, cid: &str) -> PathBuf {
        self.dir.join("seeds").join(format!("{cid}.json"))
    }

    /// Validates seeds against the crop, floods, stores the seeds and returns
    /// the preview. Any crop may be seeded, suspect or not.
    pub fn set_seeds(&mut self, cid: &str, seeds: &SeedSet) -> ServiceResult<SeedPreview> {
        let i = self.entry_index(cid)?;
        let crop = self.crop(cid)?;
        let map = segment_crop(&crop, seeds)?;
        let roles = seeds.roles()?;
        let label_png = encode_png(&map.to_image()?)?;
        write_json(&self.seeds_path(cid), seeds)?;
        write_atomic(&self.dir.join("seeds").join(format!("{cid}_labels.png")), &label_png)?;
        self.info.crops[i].advance(CropStatus::Seeded);
        self.save()?;
        let regions = map
            .counts()
            .into_iter()
            .filter_map(|(label, area)| roles.get(&label).map(|&role| RegionStat { label, role, area }))
            .collect();
        Ok(SeedPreview {
            crop: cid.to_string(),
            width: map.width(),
            height: map.height(),
            labels: map.as_raw().to_vec(),
            regions,
            png: b64(&label_png),
        })
    }

    pub fn seeds(&self, cid: &str) -> ServiceResult<SeedSet> {
        self.entry_index(cid)?;
        let p = self.seeds_path(cid);
        if !p.is_file() {
            return Err(ServiceError::conflict(format!("crop `{cid}` has no seeds")));
        }
        read_json(&p)
    }

    /// Separates a seeded crop with the stored seeds (method overridable).
    /// Replaces earlier separations of the crop and drops any assignment.
    pub fn separate(&mut self, cid: &str, method: Option<Method>) -> ServiceResult<Vec<SeparatedItem>> {
        let i = self.entry_index(cid)?;
        let mut seeds = self.seeds(cid)?;
        if let Some(m) = method {
            seeds.method = m;
        }
        let crop = self.crop(cid)?;
        let parts = separate(&crop, &seeds, &BaselineGapFiller)?;
        let out = self.dir.join("separated");
        for old in &self.info.crops[i].separated {
            for suffix in [".png", "_mask.png", ".json"] {
                let _ = fs::remove_file(out.join(format!("{old}{suffix}")));
            }
        }
        let mut items = Vec::with_capacity(parts.len());
        for p in &parts {
            let png = encode_png(&p.image)?;
            write_atomic(&out.join(format!("{}.png", p.id)), &png)?;
            save_mask(&out.join(format!("{}_mask.png", p.id)), &p.mask)?;
            write_json(&out.join(format!("{}.json", p.id)), &p.meta())?;
            items.push(SeparatedItem { meta: p.meta(), png: b64(&png) });
        }
        let entry = &mut self.info.crops[i];
        entry.separated = parts.iter().map(|p| p.id.clone()).collect();
        entry.advance(CropStatus::Separated);
        self.clear_assignment()?;
        self.save()?;
        Ok(items)
    }

    fn clear_assignment(&mut self) -> ServiceResult<()> {
        for f in ["assignment.json", "distribution.json", "karyogram.json", "karyogram.png"] {
            let _ = fs::remove_file(self.dir.join(f));
        }
        self.info.has_assignment = false;
        Ok(())
    }

    /// Karyogram units in crop order; separated crops contribute their parts.
    pub fn items(&self) -> Vec<Item> {
        let mut items = Vec::new();
        for c in &self.info.crops {
            if c.separated.is_empty() {
                items.push(Item { id: c.id.clone(), parent: c.id.clone(), separated: false });
            } else {
                items.extend(c.separated.iter().map(|s| Item { id: s.clone(), parent: c.id.clone(), separated: true }));
            }
        }
        items
    }

    pub fn item_image(&self, item: &Item) -> ServiceResult<GrayImage> {
        let sub = if item.separated { "separated" } else { "crops" };
        Ok(load_image(self.dir.join(sub).join(format!("{}.png", item.id)))?)
    }

    pub fn separated_path(&self, sid: &str) -> ServiceResult<PathBuf> {
        check_id(sid)?;
        if !self.items().iter().any(|i| i.separated && i.id == sid) {
            return Err(ServiceError::not_found(format!("no separated chromosome `{sid}`")));
        }
        Ok(self.dir.join("separated").join(format!("{sid}.png")))
    }

    fn matrix(&self, provider: &dyn ScoreProvider) -> ServiceResult<ScoreMatrix<f64>> {
        let mut rows = Vec::new();
        for item in self.items() {
            let img = self.item_image(&item)?;
            rows.push((item.id.clone(), provider.score(&item.id, &img)?));
        }
        if rows.is_empty() {
            return Err(ServiceError::conflict("session has no crops to classify"));
        }
        Ok(ScoreMatrix::new(provider.classes(), rows)?)
    }

    fn check_classes(&self, classes: usize) -> ServiceResult<()> {
        if classes != self.info.config.classes {
            return Err(ServiceError::invalid(format!(
                "scores have {classes} classes, session expects {}",
                self.info.config.classes
            )));
        }
        Ok(())
    }

    /// Stores a scores file covering every item and writes the argmax
    /// assignment. Rows for other ids are ignored.
    pub fn set_scores(&mut self, file: &ScoresFile) -> ServiceResult<Assignment> {
        self.check_classes(file.classes)?;
        let provider = FileScoreProvider::new(file)?;
        let matrix = self.matrix(&provider)?;
        self.store_scores(&matrix)
    }

    /// Scores every item with the geometric provider.
    pub fn score_geometric(&mut self) -> ServiceResult<Assignment> {
        let provider = GeometricScoreProvider::new(self.info.config.classes)?;
        let matrix = self.matrix(&provider)?;
        self.store_scores(&matrix)
    }

    fn store_scores(&mut self, matrix: &ScoreMatrix<f64>) -> ServiceResult<Assignment> {
        write_json(&self.dir.join("scores.json"), &matrix.to_file())?;
        self.info.has_scores = true;
        let assignment = argmax_assign(matrix);
        let _ = fs::remove_file(self.dir.join("distribution.json"));
        self.store_assignment(&assignment)?;
        Ok(assignment)
    }

    fn store_assignment(&mut self, assignment: &Assignment) -> ServiceResult<()> {
        write_json(&self.dir.join("assignment.json"), assignment)?;
        self.info.has_assignment = true;
        for c in &mut self.info.crops {
            c.advance(CropStatus::Classified);
        }
        self.save()?;
        let k = self.karyogram()?;
        write_json(&self.dir.join("karyogram.json"), &k)?;
        let png = render::karyogram_png(self, &k)?;
        write_atomic(&self.dir.join("karyogram.png"), &png)
    }

    pub fn scores(&self) -> ServiceResult<ScoreMatrix<f64>> {
        if !self.info.has_scores {
            return Err(ServiceError::conflict("no scores have been submitted"));
        }
        let file: ScoresFile = read_json(&self.dir.join("scores.json"))?;
        let provider = FileScoreProvider::new(&file)?;
        self.matrix(&provider)
    }

    /// Redistributes the argmax assignment to the configured expected counts.
    pub fn distribute(&mut self) -> ServiceResult<DistributionReport> {
        let matrix = self.scores()?;
        let expected = expected_counts(self.info.config.expected_total, self.info.config.classes)?;
        let report = distribute(&matrix, &argmax_assign(&matrix), &expected)?;
        write_json(&self.dir.join("distribution.json"), &report)?;
        self.store_assignment(&report.assignment)?;
        Ok(report)
    }

    pub fn assignment(&self) -> ServiceResult<Assignment> {
        if !self.info.has_assignment {
            return Err(ServiceError::conflict("no assignment yet"));
        }
        read_json(&self.dir.join("assignment.json"))
    }

    pub fn classify(&mut self, scores: Option<&ScoresFile>, redistribute: bool) -> ServiceResult<ClassifyOutcome> {
        let assignment = match scores {
            Some(f) => self.set_scores(f)?,
            None => self.score_geometric()?,
        };
        if redistribute {
            let report = self.distribute()?;
            return Ok(ClassifyOutcome { assignment: report.assignment.clone(), distribution: Some(report) });
        }
        Ok(ClassifyOutcome { assignment, distribution: None })
    }

    /// One row per class, items ordered by id, with residuals against the
    /// expected counts.
    pub fn karyogram(&self) -> ServiceResult<Karyogram> {
        let assignment = self.assignment()?;
        let c = self.info.config.classes;
        let rows: Vec<KaryogramRow> = (1..=c as u32)
            .map(|k| {
                let class = ClassLabel::new(k, c).expect("class in range");
                let items = assignment
                    .entries
                    .iter()
                    .filter(|(_, a)| a.class == class)
                    .map(|(id, a)| KaryogramItem { id: id.clone(), provenance: a.provenance })
                    .collect();
                KaryogramRow { class, items }
            })
            .collect();
        let expected = expected_counts(self.info.config.expected_total, c)
            .unwrap_or_else(|_| karyoseg::classify::ExpectedCounts::uniform(c, 2));
        let residuals = rows
            .iter()
            .zip(&expected.counts)
            .filter(|(r, &e)| r.items.len() != e)
            .map(|(r, &e)| Residual { class: r.class, delta: r.items.len() as i64 - e as i64 })
            .collect();
        Ok(Karyogram { classes: c, rows, residuals, declared_residual: expected.residual })
    }
}
