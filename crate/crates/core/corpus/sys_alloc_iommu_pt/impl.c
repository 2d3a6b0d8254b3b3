/* sys_alloc_iommu_pt -- IOMMU page tables */
int sys_alloc_iommu_pt(pn_t frm, size_t index, pn_t to, uint64_t perm)
{
    struct page *from, *page;
    struct proc *cur;

    if (!is_pn_valid(frm))
        return -EINVAL;
    if (!is_pn_valid(to))
        return -EINVAL;
    if (index >= PAGE_WORDS)
        return -EINVAL;
    from = get_page(frm);
    if (from->type != PAGE_TYPE_IOMMU_PT)
        return -EINVAL;
    if (from->owner != current)
        return -EACCES;
    if (from->data[index] != 0)
        return -EBUSY;
    page = get_page(to);
    if (page->type != PAGE_TYPE_FREE)
        return -ENOMEM;
    page->type = PAGE_TYPE_IOMMU_PT;
    page->owner = current;
    page->refcnt = 1;
    from->data[index] = page_to_addr(to) | perm;
    cur = get_proc(current);
    cur->nr_pages += 1;
    flush_iotlb();
    return 0;
}
