/* sys_map_page -- page mapping */
int sys_map_page(pn_t pt, size_t index, pn_t frame, uint64_t perm)
{
    struct page *ptp, *frp;

    if (!is_pn_valid(pt))
        return -EINVAL;
    if (!is_pn_valid(frame))
        return -EINVAL;
    if (index >= PAGE_WORDS)
        return -EINVAL;
    ptp = get_page(pt);
    frp = get_page(frame);
    if (ptp->type != PAGE_TYPE_X86_PT)
        return -EINVAL;
    if (ptp->owner != current)
        return -EACCES;
    if (frp->owner != current)
        return -EACCES;
    if (frp->type != PAGE_TYPE_FRAME)
        return -EINVAL;
    if (ptp->data[index] != 0)
        return -EBUSY;
    ptp->data[index] = (page_to_pfn(frame) << PTE_ADDR_SHIFT) | perm;
    frp->refcnt += 1;
    flush_tlb();
    return 0;
}
