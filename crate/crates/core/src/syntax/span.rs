use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock};

/// Interned source file handle. Spans carry this instead of the path so they
/// stay `Copy`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FileId(pub u32);

fn file_table() -> &'static Mutex<Vec<PathBuf>> {
    static TABLE: OnceLock<Mutex<Vec<PathBuf>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(Vec::new()))
}

impl FileId {
    pub fn intern(path: &Path) -> FileId {
        let mut table = file_table().lock().unwrap();
        if let Some(i) = table.iter().position(|p| p == path) {
            return FileId(i as u32);
        }
        table.push(path.to_path_buf());
        FileId(table.len() as u32 - 1)
    }

    pub fn path(self) -> PathBuf {
        file_table()
            .lock()
            .unwrap()
            .get(self.0 as usize)
            .cloned()
            .unwrap_or_else(|| PathBuf::from("<unknown>"))
    }
}

/// A contiguous region of a source file. Offsets are byte indices, line and
/// column are 1-based and refer to `start`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SourceSpan {
    pub file: FileId,
    pub start: u32,
    pub end: u32,
    pub line: u32,
    pub col: u32,
}

impl SourceSpan {
    pub fn to(self, other: SourceSpan) -> SourceSpan {
        SourceSpan {
            end: other.end.max(self.end),
            ..self
        }
    }

    pub fn contains(&self, other: &SourceSpan) -> bool {
        self.file == other.file && self.start <= other.start && other.end <= self.end
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file.path().display(), self.line, self.col)
    }
}
